#pragma once

// Hidden-Markov log generator with analytic ground truth, used as a test oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/error.hpp"
#include "slar/log_model.hpp"
#include "slar/markov.hpp"

namespace slar {

struct Emission {
    enum class Law { uniform, normal };
    Law law = Law::uniform;
    double a = 0.0;  // uniform: low, normal: mean
    double b = 0.0;  // uniform: high, normal: standard deviation

    static Emission uniform(double lo, double hi) { return {Law::uniform, lo, hi}; }
    static Emission constant(double v) { return {Law::uniform, v, v}; }
    static Emission normal(double mean, double sd) { return {Law::normal, mean, sd}; }

    /// P(X sense t)
    double probability(Sense sense, double t) const {
        double above = 0.0;  // P(X > t); the laws put no mass on a single point unless degenerate
        double at = 0.0;     // P(X = t)
        if (law == Law::uniform) {
            if (a == b) {
                above = a > t ? 1.0 : 0.0;
                at = a == t ? 1.0 : 0.0;
            } else {
                above = std::clamp((b - t) / (b - a), 0.0, 1.0);
            }
        } else if (b == 0.0) {
            above = a > t ? 1.0 : 0.0;
            at = a == t ? 1.0 : 0.0;
        } else {
            above = 0.5 * std::erfc((t - a) / (b * std::sqrt(2.0)));
        }
        switch (sense) {
            case Sense::greater: return above;
            case Sense::greater_equal: return above + at;
            case Sense::less: return 1.0 - above - at;
            case Sense::less_equal: return 1.0 - above;
        }
        return 0.0;
    }
};

struct SyntheticSpec {
    std::vector<std::string> variables;
    Matrix transitions;                         // hidden-state transition matrix
    std::vector<std::vector<Emission>> emissions;  // [hidden state][variable]
    std::size_t length = 0;
    std::uint64_t seed = 0;
    double sample_period = 1.0;

    void validate() const {
        const auto k = transitions.size();
        if (k == 0) throw InvalidSpec("no hidden states");
        if (variables.empty()) throw InvalidSpec("no variables");
        if (length < 2) throw InvalidSpec("length must be at least 2");
        if (emissions.size() != k) throw InvalidSpec("one emission row per hidden state required");
        for (std::size_t i = 0; i < k; ++i) {
            if (transitions[i].size() != k) throw InvalidSpec("transition matrix must be square");
            double sum = 0.0;
            for (double p : transitions[i]) {
                if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec("transition probability outside [0,1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw InvalidSpec("transition row " + std::to_string(i) + " does not sum to 1");
            if (emissions[i].size() != variables.size()) throw InvalidSpec("one emission per variable required");
            for (const auto& e : emissions[i]) {
                if (!std::isfinite(e.a) || !std::isfinite(e.b)) throw InvalidSpec("non-finite emission parameter");
                if (e.law == Emission::Law::uniform && e.b < e.a) throw InvalidSpec("uniform emission with high < low");
                if (e.law == Emission::Law::normal && e.b < 0.0) throw InvalidSpec("negative standard deviation");
            }
        }
        if (!(sample_period > 0.0)) throw InvalidSpec("sample period must be positive");
    }
};

struct SyntheticLog {
    SystemLog log;
    std::vector<std::size_t> hidden;
    Distribution stationary;  // of the hidden chain
};

/// Exact long-run probability that a single-variable threshold predicate holds.
inline double ground_truth_probability(const SyntheticSpec& spec, const Distribution& stationary, const Predicate& p) {
    if (p.coefficients().size() != 1) throw InvalidSpec("ground truth needs a single-variable predicate");
    const auto& [name, coeff] = *p.coefficients().begin();
    std::size_t var = spec.variables.size();
    for (std::size_t i = 0; i < spec.variables.size(); ++i)
        if (spec.variables[i] == name) var = i;
    if (var == spec.variables.size()) throw UnknownVariable(name);
    // c*x sense t  <=>  x sense' t/c
    const Sense sense = coeff < 0 ? flipped(p.sense()) : p.sense();
    const double t = p.offset() / coeff;
    double total = 0.0;
    for (std::size_t h = 0; h < stationary.size(); ++h)
        total += stationary[h] * spec.emissions[h][var].probability(sense, t);
    return total;
}

inline SyntheticLog generate_synthetic_log(const SyntheticSpec& spec) {
    spec.validate();
    const auto mu = stationary_distribution(spec.transitions);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto draw = [&](const std::vector<double>& probs) {
        const double u = unit(rng);
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        for (std::size_t i = probs.size(); i-- > 0;)
            if (probs[i] > 0.0) return i;
        return std::size_t{0};
    };
    const auto emit = [&](const Emission& e) {
        if (e.law == Emission::Law::uniform) return e.a == e.b ? e.a : e.a + (e.b - e.a) * unit(rng);
        if (e.b == 0.0) return e.a;
        return std::normal_distribution<double>(e.a, e.b)(rng);
    };

    std::vector<Variable> vars;
    for (const auto& v : spec.variables) vars.push_back({v, VariableKind::numeric});
    std::vector<Observation> obs;
    obs.reserve(spec.length);
    std::vector<std::size_t> hidden;
    hidden.reserve(spec.length);
    std::size_t h = draw(mu);
    for (std::size_t t = 0; t < spec.length; ++t) {
        if (t > 0) h = draw(spec.transitions[h]);
        hidden.push_back(h);
        Observation o{static_cast<double>(t) * spec.sample_period, {}};
        o.values.reserve(vars.size());
        for (const auto& e : spec.emissions[h]) o.values.push_back(emit(e));
        obs.push_back(std::move(o));
    }
    return {SystemLog(ObservationSchema(std::move(vars), std::nullopt, spec.sample_period), std::move(obs)),
            std::move(hidden), mu};
}

}  // namespace slar
