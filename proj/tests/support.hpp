#pragma once

// Fixtures shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "slar/all.hpp"

namespace slar::fixtures {

inline AbstractTrace trace_of(std::vector<Symbol> symbols, std::size_t arity = 1) {
    return AbstractTrace{arity, std::move(symbols)};
}

/// Two-symbol order-1 source with Pr(1 | previous).
inline AbstractTrace order1_trace(std::size_t n, double p1_after0, double p1_after1, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution after0(p1_after0), after1(p1_after1);
    std::vector<Symbol> s(n);
    s[0] = 0;
    for (std::size_t i = 1; i < n; ++i) s[i] = (s[i - 1] ? after1(rng) : after0(rng)) ? 1 : 0;
    return trace_of(std::move(s));
}

inline AbstractTrace iid_trace(std::size_t n, double p1, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution one(p1);
    std::vector<Symbol> s(n);
    for (auto& x : s) x = one(rng) ? 1 : 0;
    return trace_of(std::move(s));
}

/// Random irreducible (and aperiodic) chain: a Hamiltonian cycle plus random extra edges and self-loops.
inline Matrix random_irreducible(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(0.05, 1.0);
    std::bernoulli_distribution extra(std::min(1.0, 3.0 / static_cast<double>(n)));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) m[perm[k]][perm[(k + 1) % n]] = w(rng);
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] += w(rng);
        for (std::size_t j = 0; j < n; ++j)
            if (extra(rng)) m[i][j] += w(rng);
        double sum = 0.0;
        for (double v : m[i]) sum += v;
        for (double& v : m[i]) v /= sum;
    }
    return m;
}

inline std::vector<double> simulated_frequencies(const Matrix& m, std::size_t steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::discrete_distribution<std::size_t>> rows;
    for (const auto& r : m) rows.emplace_back(r.begin(), r.end());
    std::vector<double> visits(m.size(), 0.0);
    std::size_t s = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        s = rows[s](rng);
        visits[s] += 1.0;
    }
    for (auto& v : visits) v /= static_cast<double>(steps);
    return visits;
}

/// Chain over single-symbol labels {0, 1} with memory of the last symbol.
inline StationaryChain two_state_chain(double p1_after0, double p1_after1) {
    StationaryChain c;
    c.alphabet = {0, 1};
    const auto row = [](double p1) {
        std::vector<Transition> out;
        if (p1 < 1.0) out.push_back({0, 0, 1.0 - p1});
        if (p1 > 0.0) out.push_back({1, 1, p1});
        return out;
    };
    c.states = {{{0}, row(p1_after0)}, {{1}, row(p1_after1)}};
    return c;
}

inline SystemLog log_of(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
    std::vector<Variable> vars;
    for (const auto& n : names) vars.push_back({n, VariableKind::numeric});
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < rows.size(); ++i) obs.push_back({static_cast<double>(i), rows[i]});
    return SystemLog(ObservationSchema(std::move(vars), std::nullopt, 1.0), std::move(obs));
}

/// Hidden threshold system. Safe states S0 (x low) and W (x high); W always moves to the unsafe
/// state U, S0 never does. With only the property predicate, the model cannot tell S0 from W and
/// over-estimates how often the system becomes unsafe. The cut x > 60 separates them.
inline constexpr double fixture_cut = 60.0;
inline constexpr double fixture_range = 100.0;

inline SyntheticSpec threshold_fixture(std::size_t length, std::uint64_t seed) {
    SyntheticSpec s;
    s.variables = {"x", "y"};
    s.transitions = {{0.95, 0.05, 0.0}, {0.0, 0.0, 1.0}, {0.35, 0.15, 0.5}};
    s.emissions = {{Emission::uniform(0, 55), Emission::uniform(0, 50)},
                   {Emission::uniform(65, 100), Emission::uniform(0, 50)},
                   {Emission::uniform(0, 100), Emission::uniform(50.0001, 100)}};
    s.length = length;
    s.seed = seed;
    return s;
}

/// Memoryless source that is unsafe (y > 50) with probability `p`.
inline SyntheticSpec bernoulli_fixture(double p, std::size_t length, std::uint64_t seed) {
    SyntheticSpec s;
    s.variables = {"y"};
    s.transitions = {{1.0 - p, p}, {1.0 - p, p}};
    s.emissions = {{Emission::uniform(0, 50)}, {Emission::uniform(60, 100)}};
    s.length = length;
    s.seed = seed;
    return s;
}

}  // namespace slar::fixtures
