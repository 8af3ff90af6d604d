#pragma once

// Probabilistic suffix automata: the stationary chains learned from a PST.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "slar/error.hpp"
#include "slar/pst.hpp"

namespace slar {

struct Transition {
    Symbol symbol = 0;
    std::size_t target = 0;
    double probability = 0.0;

    bool operator==(const Transition&) const = default;
};

struct ChainState {
    Word label;
    std::vector<Transition> out;  // sorted by symbol, one entry per symbol

    bool operator==(const ChainState&) const = default;
};

/// Deterministic suffix-labelled chain. Row sums of the symbol-labelled transitions are 1.
struct StationaryChain {
    std::vector<Symbol> alphabet;
    std::vector<ChainState> states;

    std::size_t size() const noexcept { return states.size(); }

    std::optional<std::size_t> find(const Word& label) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i].label == label) return i;
        return std::nullopt;
    }

    const Transition* transition(std::size_t state, Symbol symbol) const {
        for (const auto& t : states[state].out)
            if (t.symbol == symbol) return &t;
        return nullptr;
    }

    /// Probability mass from `from` to `to` summed over symbols.
    double probability(std::size_t from, std::size_t to) const {
        double p = 0.0;
        for (const auto& t : states[from].out)
            if (t.target == to) p += t.probability;
        return p;
    }

    /// Row-major dense transition matrix.
    std::vector<std::vector<double>> matrix() const {
        std::vector<std::vector<double>> m(size(), std::vector<double>(size(), 0.0));
        for (std::size_t i = 0; i < size(); ++i)
            for (const auto& t : states[i].out) m[i][t.target] += t.probability;
        return m;
    }

    /// Throws when a structural invariant is broken.
    void validate(double row_tolerance = 1e-12) const {
        if (states.empty()) throw Error("chain has no states");
        for (std::size_t i = 0; i < size(); ++i) {
            double sum = 0.0;
            std::optional<Symbol> last;
            for (const auto& t : states[i].out) {
                if (t.target >= size()) throw Error("transition target out of range");
                if (!(t.probability > 0.0 && t.probability <= 1.0)) throw Error("transition probability out of (0,1]");
                if (last && t.symbol <= *last) throw Error("duplicate or unsorted transition symbol");
                last = t.symbol;
                Word extended = states[i].label;
                extended.push_back(t.symbol);
                if (!is_suffix(states[t.target].label, extended))
                    throw Error("target label " + label_string(states[t.target].label) + " is not a suffix of " +
                                label_string(extended));
                sum += t.probability;
            }
            if (std::abs(sum - 1.0) > row_tolerance)
                throw Error("row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }

    bool operator==(const StationaryChain&) const = default;
};

/// Maps a history to the state whose label is its longest suffix among state labels.
class StateMatcher {
public:
    explicit StateMatcher(const StationaryChain& chain) {
        for (std::size_t i = 0; i < chain.size(); ++i) {
            const auto& label = chain.states[i].label;
            index_.emplace(label, i);
            for (std::size_t drop = 1; drop <= label.size(); ++drop)
                prefixes_.insert(Word(label.begin() + static_cast<std::ptrdiff_t>(drop), label.end()));
        }
    }

    /// `history` is oldest-first; its last element is the current symbol.
    std::optional<std::size_t> match(std::span<const Symbol> history) const {
        Word w;
        std::optional<std::size_t> best;
        for (;;) {
            if (const auto it = index_.find(w); it != index_.end()) best = it->second;
            if (w.size() >= history.size() || !prefixes_.count(w)) return best;
            w.insert(w.begin(), history[history.size() - 1 - w.size()]);
        }
    }

private:
    std::unordered_map<Word, std::size_t, WordHash> index_;
    std::unordered_set<Word, WordHash> prefixes_;  // proper suffixes of some label
};

namespace detail {

inline Word prepend(Symbol e, const Word& w) {
    Word out;
    out.reserve(w.size() + 1);
    out.push_back(e);
    out.insert(out.end(), w.begin(), w.end());
    return out;
}

inline std::set<Word> internal_nodes(const std::set<Word>& nodes) {
    std::set<Word> internal;
    for (const auto& w : nodes)
        if (!w.empty()) internal.insert(Word(w.begin() + 1, w.end()));
    return internal;
}

inline bool label_order(const Word& a, const Word& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
}

}  // namespace detail

/// Extends the tree until suffix matching from every leaf is well defined and turns the leaves into states.
/// New nodes inherit the law of their deepest ancestor in the original tree.
/// States never seen in training and unreachable from seen ones are dropped.
inline StationaryChain pst_to_psa(const PST& pst, const SuffixStats& stats) {
    if (pst.nodes.empty()) throw Error("empty PST");
    const auto& sigma = pst.alphabet;
    const auto law = [&](const Word& w) -> const NextDistribution& { return pst.nodes.at(pst.deepest_suffix(w)); };

    std::set<Word> nodes;
    for (const auto& [w, d] : pst.nodes) nodes.insert(w);

    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& w : detail::internal_nodes(nodes))
            for (Symbol e : sigma) changed = nodes.insert(detail::prepend(e, w)).second || changed;

        const auto internal = detail::internal_nodes(nodes);
        std::vector<Word> to_extend;
        for (const auto& s : nodes) {
            if (internal.count(s)) continue;
            for (const auto& [sym, p] : law(s)) {
                if (p <= 0.0) continue;
                Word h = s;
                h.push_back(sym);
                if (internal.count(h)) {
                    to_extend.push_back(s);
                    break;
                }
            }
        }
        for (const auto& s : to_extend)
            for (Symbol e : sigma) changed = nodes.insert(detail::prepend(e, s)).second || changed;
    }

    const auto internal = detail::internal_nodes(nodes);
    std::vector<Word> leaves;
    for (const auto& w : nodes)
        if (!internal.count(w)) leaves.push_back(w);
    std::sort(leaves.begin(), leaves.end(), detail::label_order);

    StationaryChain full;
    full.alphabet = sigma;
    for (const auto& l : leaves) full.states.push_back({l, {}});
    const StateMatcher matcher(full);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        for (const auto& [sym, p] : law(leaves[i])) {
            if (p <= 0.0) continue;
            Word h = leaves[i];
            h.push_back(sym);
            const auto target = matcher.match(h);
            if (!target) throw Error("internal: no state for history " + label_string(h));
            full.states[i].out.push_back({sym, *target, p});
        }
    }

    // Reachability closure from states whose label occurs in the training trace.
    std::vector<bool> keep(full.size(), false);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < full.size(); ++i) {
        const auto& l = full.states[i].label;
        if (l.size() <= stats.max_length() && stats.count(l) > 0) {
            keep[i] = true;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        for (const auto& t : full.states[i].out)
            if (!keep[t.target]) {
                keep[t.target] = true;
                stack.push_back(t.target);
            }
    }
    if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; })) return full;

    std::vector<std::size_t> remap(full.size(), 0);
    StationaryChain chain;
    chain.alphabet = sigma;
    for (std::size_t i = 0; i < full.size(); ++i)
        if (keep[i]) {
            remap[i] = chain.states.size();
            chain.states.push_back(full.states[i]);
        }
    for (auto& s : chain.states)
        for (auto& t : s.out) t.target = remap[t.target];
    return chain;
}

}  // namespace slar
