#pragma once

// Validating reported violations on a testing log and locating spurious transitions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/detail/text.hpp"
#include "slar/error.hpp"
#include "slar/log_model.hpp"
#include "slar/psa.hpp"

namespace slar {

/// Fraction of symbols whose property bit is set.
inline double empirical_unsafe_probability(const AbstractTrace& trace, std::size_t property_bit) {
    if (trace.symbols.empty()) throw Error("empty trace");
    const auto n = std::count_if(trace.symbols.begin(), trace.symbols.end(),
                                 [&](Symbol s) { return (s >> property_bit) & 1u; });
    return static_cast<double>(n) / static_cast<double>(trace.size());
}

inline std::uint64_t count_unsafe(const AbstractTrace& trace, std::size_t property_bit) {
    return static_cast<std::uint64_t>(std::count_if(trace.symbols.begin(), trace.symbols.end(),
                                                    [&](Symbol s) { return (s >> property_bit) & 1u; }));
}

enum class ConfidenceMode {
    tail,        // 1 - P(Y >= n | p = r)
    point_mass,  // 1 - P(Y = n | p = r)
};

namespace detail {

inline double log_binomial_pmf(std::uint64_t N, std::uint64_t k, double p) {
    const double dn = static_cast<double>(N), dk = static_cast<double>(k);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) + dk * std::log(p) +
           (dn - dk) * std::log1p(-p);
}

// log sum_{k=lo}^{hi} pmf(k); successive terms by the pmf ratio recurrence.
inline double log_binomial_range(std::uint64_t N, std::uint64_t lo, std::uint64_t hi, double p) {
    if (lo > hi) return -INFINITY;
    const double log_odds = std::log(p) - std::log1p(-p);
    const auto step = [&](std::uint64_t k) {  // log pmf(k+1) - log pmf(k)
        return std::log(static_cast<double>(N - k)) - std::log(static_cast<double>(k + 1)) + log_odds;
    };
    const double first = log_binomial_pmf(N, lo, p);
    double peak = first, cur = first;
    for (auto k = lo; k < hi; ++k) peak = std::max(peak, cur += step(k));
    double acc = 0.0;
    cur = first;
    for (auto k = lo;; ++k) {
        acc += std::exp(cur - peak);
        if (k == hi) break;
        cur += step(k);
    }
    return peak + std::log(acc);
}

}  // namespace detail

/// Confidence that the unsafe probability exceeds r, given n unsafe of N observations.
inline double violation_confidence(std::uint64_t N, std::uint64_t n, double r,
                                   ConfidenceMode mode = ConfidenceMode::tail) {
    if (N == 0 || n > N) throw InvalidCounts("need 0 <= n <= N and N > 0");
    if (!(r > 0.0 && r < 1.0)) throw InvalidCounts("threshold must lie in (0,1)");
    if (mode == ConfidenceMode::point_mass)
        return std::clamp(1.0 - std::exp(detail::log_binomial_pmf(N, n, r)), 0.0, 1.0);
    if (n == 0) return 0.0;
    // Sum whichever tail is small so the result keeps its precision.
    const double mean = static_cast<double>(N) * r;
    if (static_cast<double>(n - 1) < mean)
        return std::clamp(std::exp(detail::log_binomial_range(N, 0, n - 1, r)), 0.0, 1.0);
    return std::clamp(1.0 - std::exp(detail::log_binomial_range(N, n, N, r)), 0.0, 1.0);
}

using Edge = std::pair<std::size_t, std::size_t>;

struct TransitionCounts {
    std::vector<std::uint64_t> visits;          // #s_i
    std::map<Edge, std::uint64_t> edges;        // #(s_i, s_j)
    std::vector<std::uint64_t> desyncs_at;      // steps from s_i with no matching transition
    std::uint64_t unmatched_prefix = 0;         // positions before the first state match
    std::uint64_t desyncs = 0;
    std::optional<std::size_t> final_state;

    std::uint64_t edge(std::size_t from, std::size_t to) const {
        const auto it = edges.find({from, to});
        return it == edges.end() ? 0 : it->second;
    }
};

/// Walks `trace` through the chain by suffix matching. `step(t, from, to)` fires for each
/// matched transition from position t; `desync(t, from)` when position t+1 has no transition.
/// Returns the first matched position.
template <class OnVisit, class OnStep, class OnDesync>
std::size_t walk_trace(const StationaryChain& chain, const AbstractTrace& trace, OnVisit&& visit, OnStep&& step,
                       OnDesync&& desync, std::optional<std::size_t>* final_state = nullptr) {
    const StateMatcher matcher(chain);
    const std::span<const Symbol> sym(trace.symbols);
    const std::size_t n = sym.size();
    const auto match_at = [&](std::size_t t) { return matcher.match(sym.first(t + 1)); };

    std::size_t t = 0;
    std::optional<std::size_t> state;
    while (t < n && !(state = match_at(t))) ++t;
    if (!state) throw NoMatchingState();
    const std::size_t first = t;
    visit(t, *state);
    while (t + 1 < n) {
        if (const auto* tr = chain.transition(*state, sym[t + 1])) {
            step(t, *state, tr->target);
            state = tr->target;
            ++t;
            visit(t, *state);
            continue;
        }
        desync(t, *state);
        state.reset();
        ++t;
        while (t < n && !(state = match_at(t))) ++t;
        if (!state) break;
        visit(t, *state);
    }
    if (final_state) *final_state = state;
    return first;
}

inline TransitionCounts count_state_transitions(const StationaryChain& chain, const AbstractTrace& trace) {
    TransitionCounts c;
    c.visits.assign(chain.size(), 0);
    c.desyncs_at.assign(chain.size(), 0);
    c.unmatched_prefix = walk_trace(
        chain, trace, [&](std::size_t, std::size_t s) { ++c.visits[s]; },
        [&](std::size_t, std::size_t from, std::size_t to) { ++c.edges[{from, to}]; },
        [&](std::size_t, std::size_t from) {
            ++c.desyncs;
            ++c.desyncs_at[from];
        },
        &c.final_state);
    return c;
}

struct SpuriousEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double model_probability = 0.0;
    double observed_probability = 0.0;
    double deviation = 0.0;
};

/// Edges whose learned probability exceeds the testing-log estimate, largest deviation first.
inline std::vector<SpuriousEdge> rank_spurious(const StationaryChain& chain, const TransitionCounts& counts) {
    std::vector<SpuriousEdge> out;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (counts.visits[i] == 0) continue;
        std::map<std::size_t, double> row;
        for (const auto& t : chain.states[i].out) row[t.target] += t.probability;
        for (const auto& [j, p] : row) {
            const double observed = static_cast<double>(counts.edge(i, j)) / static_cast<double>(counts.visits[i]);
            const double dev = p - observed;
            if (dev > 1e-12) out.push_back({i, j, p, observed, dev});
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SpuriousEdge& a, const SpuriousEdge& b) { return a.deviation > b.deviation; });
    return out;
}

struct LabeledDataset {
    std::vector<std::string> features;
    std::vector<std::vector<double>> positives;
    std::vector<std::vector<double>> negatives;

    std::size_t size() const noexcept { return positives.size() + negatives.size(); }
};

/// Concrete observations at visits of `edge.first`, split by whether the walk moves to `edge.second`.
inline LabeledDataset collect_classification_data(const StationaryChain& chain, const SystemLog& log,
                                                  const AbstractTrace& trace, Edge edge) {
    if (log.size() != trace.size()) throw DimensionMismatch("concrete and abstract logs differ in length");
    if (chain.probability(edge.first, edge.second) <= 0.0) throw Error("edge is not a transition of the chain");
    LabeledDataset data;
    for (const auto& v : log.schema().variables()) data.features.push_back(v.name);
    walk_trace(
        chain, trace, [](std::size_t, std::size_t) {},
        [&](std::size_t t, std::size_t from, std::size_t to) {
            if (from != edge.first) return;
            (to == edge.second ? data.positives : data.negatives).push_back(log[t].values);
        },
        [](std::size_t, std::size_t) {});
    return data;
}

/// `label,feature...` rows, 1 for positives and 0 for negatives.
inline void write_dataset(std::ostream& out, const LabeledDataset& data) {
    out << "label";
    for (const auto& f : data.features) out << ',' << f;
    out << '\n';
    const auto rows = [&](const auto& set, int label) {
        for (const auto& x : set) {
            out << label;
            for (double v : x) out << ',' << detail::format_double(v);
            out << '\n';
        }
    };
    rows(data.positives, 1);
    rows(data.negatives, 0);
}

}  // namespace slar
