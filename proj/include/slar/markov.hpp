#pragma once

// Structural and steady-state analysis of learned chains.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/error.hpp"
#include "slar/psa.hpp"

namespace slar {

using Distribution = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;
using StateSet = std::vector<std::size_t>;

/// More than one closed class: no unique stationary distribution.
class ReducibleModel : public Error {
public:
    explicit ReducibleModel(std::vector<StateSet> components)
        : Error("chain has " + std::to_string(components.size()) + " closed classes"),
          components_(std::move(components)) {}
    const std::vector<StateSet>& components() const noexcept { return components_; }

private:
    std::vector<StateSet> components_;
};

struct SolverOptions {
    std::size_t dense_limit = 2000;
    double power_tolerance = 1e-12;
    std::size_t power_max_iterations = 1'000'000;
};

/// Strongly connected components without outgoing edges, each sorted, ordered by smallest member.
inline std::vector<StateSet> terminal_components(const Matrix& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m[i][j] > 0.0) adj[i].push_back(j);

    // Iterative Tarjan.
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> work;
    std::size_t counter = 0, ncomp = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        work.push_back({root, 0});
        while (!work.empty()) {
            auto& [v, next] = work.back();
            if (next == 0) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (next < adj[v].size()) {
                const auto w = adj[v][next++];
                if (index[w] == unvisited)
                    work.push_back({w, 0});
                else if (on_stack[w])
                    low[v] = std::min(low[v], index[w]);
                continue;
            }
            if (low[v] == index[v]) {
                for (;;) {
                    const auto w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if (w == v) break;
                }
                ++ncomp;
            }
            const auto finished = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[finished]);
        }
    }

    std::vector<bool> closed(ncomp, true);
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : adj[i])
            if (comp[i] != comp[j]) closed[comp[i]] = false;
    std::vector<StateSet> members(ncomp);
    for (std::size_t i = 0; i < n; ++i) members[comp[i]].push_back(i);
    std::vector<StateSet> out;
    for (std::size_t c = 0; c < ncomp; ++c)
        if (closed[c]) out.push_back(std::move(members[c]));
    std::sort(out.begin(), out.end(), [](const StateSet& a, const StateSet& b) { return a.front() < b.front(); });
    return out;
}

inline std::vector<StateSet> terminal_components(const StationaryChain& chain) {
    return terminal_components(chain.matrix());
}

inline bool is_irreducible(const StationaryChain& chain) {
    const auto comps = terminal_components(chain);
    return comps.size() == 1 && comps.front().size() == chain.size();
}

/// max_j |(mu P)_j - mu_j|
inline double stationary_residual(const Matrix& m, const Distribution& mu) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) s += mu[i] * m[i][j];
        worst = std::max(worst, std::abs(s - mu[j]));
    }
    return worst;
}

namespace detail {

inline Matrix restrict(const Matrix& m, const StateSet& states) {
    Matrix sub(states.size(), std::vector<double>(states.size(), 0.0));
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = 0; b < states.size(); ++b) sub[a][b] = m[states[a]][states[b]];
    return sub;
}

inline void clean(Distribution& mu) {
    for (auto& v : mu)
        if (v < 0.0) v = 0.0;
    const double sum = std::accumulate(mu.begin(), mu.end(), 0.0);
    for (auto& v : mu) v /= sum;
}

// Balance equations with one row replaced by the normalization constraint.
inline Distribution solve_balance(const Matrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd x = lu.solve(b);
    x += lu.solve(b - a * x);  // one refinement step
    Distribution mu(x.data(), x.data() + n);
    clean(mu);
    return mu;
}

}  // namespace detail

/// Lazy power iteration mu <- mu (I + P) / 2 from the uniform vector; converges on periodic chains too.
inline Distribution power_iteration(const Matrix& m, double tolerance = 1e-12,
                                    std::size_t max_iterations = 1'000'000) {
    const std::size_t n = m.size();
    Distribution mu(n, 1.0 / static_cast<double>(n)), next(n);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (mu[i] == 0.0) continue;
            const double half = 0.5 * mu[i];
            next[i] += half;
            for (std::size_t j = 0; j < n; ++j) next[j] += half * m[i][j];
        }
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) delta += std::abs(next[j] - mu[j]);
        mu.swap(next);
        if (delta < tolerance) break;
    }
    detail::clean(mu);
    return mu;
}

/// Unique stationary distribution, zero on transient states.
inline Distribution stationary_distribution(const Matrix& m, const SolverOptions& opt = {}) {
    auto comps = terminal_components(m);
    if (comps.size() != 1) throw ReducibleModel(std::move(comps));
    const auto& closed = comps.front();
    const auto sub = detail::restrict(m, closed);
    const auto local = closed.size() <= opt.dense_limit
                           ? detail::solve_balance(sub)
                           : power_iteration(sub, opt.power_tolerance, opt.power_max_iterations);
    Distribution mu(m.size(), 0.0);
    for (std::size_t k = 0; k < closed.size(); ++k) mu[closed[k]] = local[k];
    return mu;
}

inline Distribution stationary_distribution(const StationaryChain& chain, const SolverOptions& opt = {}) {
    return stationary_distribution(chain.matrix(), opt);
}

/// Steady-state safety property: the long-run probability of `variable sense bound` is at most `threshold`.
struct SafetyProperty {
    std::string variable;
    Sense sense = Sense::greater;  // greater or less
    double bound = 0.0;
    double threshold = 0.0;  // r

    Predicate predicate() const { return Predicate::threshold(variable, sense, bound); }
    bool operator==(const SafetyProperty&) const = default;
};

inline std::size_t property_bit(const SafetyProperty& prop, const PredicateSet& predicates) {
    const auto idx = predicates.index_of(prop.predicate());
    if (!idx) throw PropertyPredicateMissing("property predicate " + to_string(prop.predicate()) +
                                             " is not in the predicate set");
    return *idx;
}

/// States whose most recent abstract observation violates the property.
inline StateSet unsafe_states(const StationaryChain& chain, const SafetyProperty& prop,
                              const PredicateSet& predicates) {
    const auto bit = property_bit(prop, predicates);
    StateSet out;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto& l = chain.states[i].label;
        if (!l.empty() && ((l.back() >> bit) & 1u)) out.push_back(i);
    }
    return out;
}

/// Sum of mu over the unsafe states. A memoryless (empty-label) state contributes its
/// mass times the probability of emitting an unsafe symbol.
inline double unsafe_probability(const StationaryChain& chain, const Distribution& mu, const SafetyProperty& prop,
                                 const PredicateSet& predicates) {
    const auto bit = property_bit(prop, predicates);
    double pu = 0.0;
    for (auto i : unsafe_states(chain, prop, predicates)) pu += mu[i];
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (!chain.states[i].label.empty()) continue;
        for (const auto& t : chain.states[i].out)
            if ((t.symbol >> bit) & 1u) pu += mu[i] * t.probability;
    }
    return std::clamp(pu, 0.0, 1.0);
}

inline double unsafe_probability(const StationaryChain& chain, const SafetyProperty& prop,
                                 const PredicateSet& predicates, const SolverOptions& opt = {}) {
    return unsafe_probability(chain, stationary_distribution(chain, opt), prop, predicates);
}

}  // namespace slar
