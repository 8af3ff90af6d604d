#pragma once

// Probabilistic suffix tree learning over a single abstract trace.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/error.hpp"

namespace slar {

/// A context, oldest symbol first; its suffixes are the more recent histories.
using Word = std::vector<Symbol>;

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept {
        std::uint64_t h = 1469598103934665603ull ^ w.size();
        for (Symbol s : w) {
            h ^= s;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Next-symbol probabilities keyed by symbol; absent symbols have probability 0.
using NextDistribution = std::map<Symbol, double>;

inline bool is_suffix(const Word& suffix, const Word& word) {
    return suffix.size() <= word.size() && std::equal(suffix.begin(), suffix.end(), word.end() - static_cast<std::ptrdiff_t>(suffix.size()));
}

inline std::string label_string(const Word& w) {
    if (w.empty()) return "()";
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(w[i]);
    }
    return out;
}

/// Occurrence and successor counts of every word up to a maximum length.
class SuffixStats {
public:
    struct Entry {
        std::uint64_t count = 0;                                 // occurrences as a contiguous subword
        std::vector<std::pair<Symbol, std::uint64_t>> next;      // successor counts, sorted by symbol
    };

    SuffixStats(const AbstractTrace& trace, std::size_t max_length)
        : trace_(trace.symbols), max_length_(max_length) {
        const std::size_t n = trace_.size();
        std::map<Symbol, std::uint64_t> totals;
        for (Symbol s : trace_) ++totals[s];
        for (const auto& [s, c] : totals) {
            alphabet_.push_back(s);
            root_.next.emplace_back(s, c);
        }
        root_.count = n;

        Word key;
        key.reserve(max_length_);
        for (std::size_t end = 0; end < n; ++end) {
            const std::size_t longest = std::min(max_length_, end + 1);
            for (std::size_t len = 1; len <= longest; ++len) {
                key.assign(trace_.begin() + static_cast<std::ptrdiff_t>(end + 1 - len),
                           trace_.begin() + static_cast<std::ptrdiff_t>(end + 1));
                auto& e = entries_[key];
                ++e.count;
                if (end + 1 < n) bump(e.next, trace_[end + 1]);
            }
        }
    }

    const std::vector<Symbol>& trace() const noexcept { return trace_; }
    const std::vector<Symbol>& alphabet() const noexcept { return alphabet_; }
    std::size_t max_length() const noexcept { return max_length_; }
    std::size_t trace_length() const noexcept { return trace_.size(); }

    std::uint64_t count(const Word& w) const {
        check_length(w);
        if (w.empty()) return root_.count;
        const auto it = entries_.find(w);
        return it == entries_.end() ? 0 : it->second.count;
    }

    /// Occurrences of w divided by the number of length-|w| windows.
    double frequency(const Word& w) const {
        check_length(w);
        if (w.empty()) return 1.0;
        if (w.size() > trace_.size()) return 0.0;
        return static_cast<double>(count(w)) / static_cast<double>(trace_.size() - w.size() + 1);
    }

    /// True when w occurs at least once with a following symbol.
    bool has_successor(const Word& w) const {
        check_length(w);
        if (w.empty()) return !trace_.empty();
        const auto it = entries_.find(w);
        return it != entries_.end() && !it->second.next.empty();
    }

    /// Empirical conditional Pr(w, sigma). The root uses overall symbol frequencies.
    NextDistribution next_symbol_distribution(const Word& w) const {
        check_length(w);
        const Entry* e = &root_;
        if (!w.empty()) {
            const auto it = entries_.find(w);
            if (it == entries_.end() || it->second.next.empty())
                throw UnseenContext("context " + label_string(w) + " has no observed successor");
            e = &it->second;
        }
        std::uint64_t total = 0;
        for (const auto& [s, c] : e->next) total += c;
        NextDistribution d;
        for (const auto& [s, c] : e->next) d[s] = static_cast<double>(c) / static_cast<double>(total);
        return d;
    }

private:
    static void bump(std::vector<std::pair<Symbol, std::uint64_t>>& next, Symbol s) {
        auto it = std::lower_bound(next.begin(), next.end(), s,
                                   [](const auto& p, Symbol v) { return p.first < v; });
        if (it != next.end() && it->first == s)
            ++it->second;
        else
            next.insert(it, {s, 1});
    }

    void check_length(const Word& w) const {
        if (w.size() > max_length_)
            throw WordTooLong("word of length " + std::to_string(w.size()) + " exceeds maximum " +
                              std::to_string(max_length_));
    }

    std::vector<Symbol> trace_;
    std::size_t max_length_;
    std::vector<Symbol> alphabet_;
    Entry root_;
    std::unordered_map<Word, Entry, WordHash> entries_;
};

struct PstOptions {
    double frequency_threshold = 0.01;  // candidate cutoff
    double divergence_threshold = 0.01;  // growth test
    std::size_t max_depth = 10;
    double zero_floor = 1e-4;  // stands in for a zero reference probability inside the log ratio

    static PstOptions with_epsilon(double eps, std::size_t depth = 10) {
        return PstOptions{eps, eps, depth, 1e-4};
    }
};

/// Suffix-closed set of contexts, each with its empirical next-symbol law.
struct PST {
    std::vector<Symbol> alphabet;
    std::map<Word, NextDistribution> nodes;
    PstOptions options;

    bool contains(const Word& w) const { return nodes.count(w) != 0; }
    bool root_only() const { return nodes.size() == 1; }

    std::size_t depth() const {
        std::size_t d = 0;
        for (const auto& [w, dist] : nodes) d = std::max(d, w.size());
        return d;
    }

    /// Longest suffix of w present in the tree (the root at worst).
    Word deepest_suffix(const Word& w) const {
        for (std::size_t drop = 0; drop <= w.size(); ++drop) {
            Word s(w.begin() + static_cast<std::ptrdiff_t>(drop), w.end());
            if (contains(s)) return s;
        }
        return {};
    }

    bool suffix_closed() const {
        for (const auto& [w, dist] : nodes)
            if (!w.empty() && !contains(Word(w.begin() + 1, w.end()))) return false;
        return contains({});
    }

    bool operator==(const PST& o) const {
        return alphabet == o.alphabet && nodes == o.nodes;
    }
};

/// Weighted divergence term of the growth test: fre(w) * sum Pr(w,s) log(Pr(w,s)/Pr(ref,s)).
inline double growth_score(double frequency, const NextDistribution& candidate, const NextDistribution& reference,
                           double zero_floor) {
    double kl = 0.0;
    for (const auto& [s, p] : candidate) {
        if (p <= 0.0) continue;
        const auto it = reference.find(s);
        const double q = it == reference.end() || it->second <= 0.0 ? zero_floor : it->second;
        kl += p * std::log(p / q);
    }
    return frequency * kl;
}

inline PST grow_pst(const SuffixStats& stats, const PstOptions& opt) {
    if (stats.trace_length() < 2) throw TraceTooShort("learning needs at least two symbols");
    if (opt.max_depth > stats.max_length())
        throw WordTooLong("statistics were collected only up to length " + std::to_string(stats.max_length()));

    PST tree;
    tree.alphabet = stats.alphabet();
    tree.options = opt;
    tree.nodes[{}] = stats.next_symbol_distribution({});

    std::deque<Word> candidates;
    for (Symbol s : tree.alphabet)
        if (stats.frequency({s}) > opt.frequency_threshold) candidates.push_back({s});

    while (!candidates.empty()) {
        Word pi = std::move(candidates.front());
        candidates.pop_front();
        const double fre = stats.frequency(pi);

        if (stats.has_successor(pi)) {
            const Word ref = tree.deepest_suffix(Word(pi.begin() + 1, pi.end()));
            const auto dist = stats.next_symbol_distribution(pi);
            if (growth_score(fre, dist, tree.nodes.at(ref), opt.zero_floor) >= opt.divergence_threshold) {
                for (std::size_t drop = 0; drop < pi.size(); ++drop) {
                    Word s(pi.begin() + static_cast<std::ptrdiff_t>(drop), pi.end());
                    if (tree.contains(s)) break;  // suffix-closed: the rest is present
                    tree.nodes.emplace(s, stats.has_successor(s) ? stats.next_symbol_distribution(s)
                                                                 : tree.nodes.at(tree.deepest_suffix(s)));
                }
            }
        }

        if (fre > opt.frequency_threshold && pi.size() < opt.max_depth) {
            for (Symbol e : tree.alphabet) {
                Word longer;
                longer.reserve(pi.size() + 1);
                longer.push_back(e);
                longer.insert(longer.end(), pi.begin(), pi.end());
                if (stats.frequency(longer) > 0.0) candidates.push_back(std::move(longer));
            }
        }
    }
    return tree;
}

inline PST grow_pst(const AbstractTrace& trace, const PstOptions& opt) {
    if (trace.size() < 2) throw TraceTooShort("learning needs at least two symbols");
    return grow_pst(SuffixStats(trace, opt.max_depth), opt);
}

inline PST grow_pst(const AbstractTrace& trace, double epsilon, std::size_t max_depth = 10) {
    return grow_pst(trace, PstOptions::with_epsilon(epsilon, max_depth));
}

}  // namespace slar
