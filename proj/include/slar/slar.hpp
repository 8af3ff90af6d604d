#pragma once

// Learn, verify, validate and refine loop over one training log and one testing log.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/error.hpp"
#include "slar/log_model.hpp"
#include "slar/markov.hpp"
#include "slar/psa.hpp"
#include "slar/pst.hpp"
#include "slar/svm.hpp"
#include "slar/validation.hpp"

namespace slar {

struct SlarConfig {
    double epsilon = 0.01;                     // candidate-frequency cutoff
    std::optional<double> divergence_epsilon;  // growth-test threshold; defaults to epsilon
    std::size_t max_depth = 10;
    std::size_t stride = 1;
    double epsilon_retry_factor = 5.0;         // root-only tree with violations: retry at epsilon / factor
    std::size_t svm_epochs = 2000;
    double svm_c = 1000.0;
    std::size_t max_rounds = 20;
    SolverOptions solver;
    ConfidenceMode confidence = ConfidenceMode::tail;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
        if (divergence_epsilon && !(*divergence_epsilon > 0.0)) throw Error("divergence epsilon must be positive");
        if (max_depth == 0 || stride == 0 || svm_epochs == 0 || max_rounds == 0)
            throw Error("depth, stride, classifier budget and round cap must be positive");
        if (!(epsilon_retry_factor > 1.0)) throw Error("epsilon retry factor must exceed 1");
        if (!(svm_c > 0.0)) throw Error("classifier C must be positive");
    }

    PstOptions pst_options(double eps_scale = 1.0) const {
        return PstOptions{epsilon / eps_scale, divergence_epsilon.value_or(epsilon) / eps_scale, max_depth, 1e-4};
    }
};

/// r = 1.2 * P_train, the 20% margin protocol.
inline double threshold_with_margin(double p_train, double margin = 0.2) { return (1.0 + margin) * p_train; }

enum class Outcome { verified, violated, inconclusive };

inline std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::verified: return "verified";
        case Outcome::violated: return "violated";
        case Outcome::inconclusive: return "inconclusive";
    }
    return "?";
}

struct SpuriousChoice {
    Word from;
    Word to;
    double deviation = 0.0;
};

struct RoundRecord {
    std::size_t round = 0;
    std::size_t predicate_count = 0;
    double epsilon = 0.0;
    bool epsilon_retried = false;
    std::size_t model_size = 0;
    double p_learn = 0.0;
    std::optional<double> p_test;
    bool reducible_fallback = false;
    std::uint64_t desyncs = 0;
    std::size_t spurious_edges = 0;
    std::optional<SpuriousChoice> refined_edge;
    std::optional<std::string> added_predicate;
};

struct LearnedModel {
    PredicateSet predicates;
    PST tree;
    StationaryChain chain;
    Distribution stationary;
    bool reducible_fallback = false;
    double epsilon = 0.0;
    bool epsilon_retried = false;
};

struct VerificationReport {
    Outcome outcome = Outcome::inconclusive;
    SafetyProperty property;
    PredicateSet predicates;
    std::optional<StationaryChain> chain;  // evidence when verified
    double p_train = 0.0;
    double p_learn = 0.0;
    std::optional<double> p_test;
    std::uint64_t test_length = 0;
    std::uint64_t test_unsafe = 0;
    std::optional<double> confidence;
    std::size_t model_size = 0;
    double epsilon = 0.0;
    bool zero_support = false;
    bool reducible_fallback = false;
    std::uint64_t desyncs = 0;
    std::vector<RoundRecord> rounds;
    std::vector<std::string> warnings;
    std::string reason;
    double seconds = 0.0;
};

/// Visit frequencies of the chain's states along a trace.
inline Distribution empirical_state_frequencies(const StationaryChain& chain, const AbstractTrace& trace) {
    const auto counts = count_state_transitions(chain, trace);
    std::uint64_t total = 0;
    for (auto v : counts.visits) total += v;
    Distribution mu(chain.size(), 0.0);
    for (std::size_t i = 0; i < chain.size(); ++i)
        mu[i] = static_cast<double>(counts.visits[i]) / static_cast<double>(total);
    return mu;
}

/// Abstracts the log, grows the tree (retrying with a stricter epsilon when it stays at the root
/// although the property bit fires), builds the chain and its steady state.
inline LearnedModel learn_model(const SystemLog& train, const PredicateSet& predicates, std::size_t property_bit,
                                const SlarConfig& cfg) {
    const auto trace = abstract_trace(train, predicates);
    const SuffixStats stats(trace, cfg.max_depth);

    LearnedModel m;
    m.predicates = predicates;
    m.epsilon = cfg.epsilon;
    m.tree = grow_pst(stats, cfg.pst_options());
    if (m.tree.root_only() && count_unsafe(trace, property_bit) > 0) {
        m.tree = grow_pst(stats, cfg.pst_options(cfg.epsilon_retry_factor));
        m.epsilon = cfg.epsilon / cfg.epsilon_retry_factor;
        m.epsilon_retried = true;
    }
    m.chain = pst_to_psa(m.tree, stats);
    try {
        m.stationary = stationary_distribution(m.chain, cfg.solver);
    } catch (const ReducibleModel&) {
        m.stationary = empirical_state_frequencies(m.chain, trace);
        m.reducible_fallback = true;
    }
    return m;
}

inline VerificationReport run_slar(const SystemLog& train_in, const SystemLog& test_in, const SafetyProperty& prop,
                                   const SlarConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    cfg.validate();
    if (train_in.schema().variables() != test_in.schema().variables())
        throw InvalidSchema("training and testing logs have different variables");
    if (!train_in.schema().index_of(prop.variable)) throw UnknownVariable(prop.variable);
    if (!(prop.threshold >= 0.0 && prop.threshold <= 1.0)) throw Error("property threshold must lie in [0,1]");

    const SystemLog train = cfg.stride > 1 ? downsample(train_in, cfg.stride) : train_in;
    const SystemLog test = cfg.stride > 1 ? downsample(test_in, cfg.stride) : test_in;

    VerificationReport rep;
    rep.property = prop;
    rep.predicates = PredicateSet({prop.predicate()});
    constexpr std::size_t bit = 0;
    const double r = prop.threshold;

    const auto finish = [&](Outcome o, std::string reason) {
        rep.outcome = o;
        rep.reason = std::move(reason);
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return rep;
    };
    const auto record_test = [&](const AbstractTrace& t) {
        rep.test_length = t.size();
        rep.test_unsafe = count_unsafe(t, bit);
        rep.p_test = empirical_unsafe_probability(t, bit);
    };

    rep.p_train = empirical_unsafe_probability(abstract_trace(train, rep.predicates), bit);
    if (rep.p_train == 0.0) {
        const auto m = learn_model(train, rep.predicates, bit, cfg);
        rep.zero_support = true;
        rep.warnings.push_back("property never violated in the training log");
        rep.chain = m.chain;
        rep.model_size = m.chain.size();
        rep.epsilon = m.epsilon;
        rep.p_learn = unsafe_probability(m.chain, m.stationary, prop, rep.predicates);
        record_test(abstract_trace(test, rep.predicates));
        RoundRecord rr;
        rr.round = 1;
        rr.predicate_count = 1;
        rr.epsilon = m.epsilon;
        rr.model_size = m.chain.size();
        rr.p_learn = rep.p_learn;
        rr.p_test = rep.p_test;
        rep.rounds.push_back(rr);
        return finish(Outcome::verified, "zero support: the training log never violates the property");
    }

    for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
        const auto m = learn_model(train, rep.predicates, bit, cfg);
        RoundRecord rr;
        rr.round = round;
        rr.predicate_count = rep.predicates.size();
        rr.epsilon = m.epsilon;
        rr.epsilon_retried = m.epsilon_retried;
        rr.model_size = m.chain.size();
        rr.reducible_fallback = m.reducible_fallback;
        rr.p_learn = unsafe_probability(m.chain, m.stationary, prop, rep.predicates);

        rep.p_learn = rr.p_learn;
        rep.model_size = m.chain.size();
        rep.epsilon = m.epsilon;
        if (m.reducible_fallback && !rep.reducible_fallback) {
            rep.reducible_fallback = true;
            rep.warnings.push_back("learned chain is reducible; used empirical state frequencies");
        }
        if (m.epsilon_retried)
            rep.warnings.push_back("round " + std::to_string(round) + ": tree did not grow, retried with epsilon " +
                                   detail::format_double(m.epsilon));

        if (rr.p_learn <= r) {
            rep.chain = m.chain;
            record_test(abstract_trace(test, rep.predicates));
            rr.p_test = rep.p_test;
            rep.rounds.push_back(rr);
            return finish(Outcome::verified, "learned steady-state unsafe probability is within the threshold");
        }

        const auto test_trace = abstract_trace(test, rep.predicates);
        record_test(test_trace);
        rr.p_test = rep.p_test;
        if (*rep.p_test > r) {
            // With r = 0 a single unsafe observation already refutes the property.
            rep.confidence = r > 0.0 ? violation_confidence(rep.test_length, rep.test_unsafe, r, cfg.confidence) : 1.0;
            rep.rounds.push_back(rr);
            return finish(Outcome::violated, "testing log confirms the violation");
        }

        TransitionCounts counts;
        try {
            counts = count_state_transitions(m.chain, test_trace);
        } catch (const NoMatchingState&) {
            rep.rounds.push_back(rr);
            return finish(Outcome::inconclusive, "testing log never matches a state of the learned chain");
        }
        rr.desyncs = counts.desyncs;
        rep.desyncs += counts.desyncs;

        if (rep.predicates.size() == PredicateSet::max_size) {
            rep.rounds.push_back(rr);
            return finish(Outcome::inconclusive, "predicate set reached the symbol width");
        }
        const auto ranked = rank_spurious(m.chain, counts);
        rr.spurious_edges = ranked.size();
        bool refined = false;
        for (const auto& e : ranked) {
            const auto data = collect_classification_data(m.chain, test, test_trace, {e.from, e.to});
            const auto sep = train_linear_separator(data, SvmOptions{cfg.svm_c, cfg.svm_epochs, 1e-4, cfg.seed});
            if (!sep) continue;
            Predicate p = hyperplane_to_predicate(*sep.hyperplane);
            if (rep.predicates.contains(p)) continue;
            rr.refined_edge = SpuriousChoice{m.chain.states[e.from].label, m.chain.states[e.to].label, e.deviation};
            rr.added_predicate = to_string(p);
            rep.predicates.add(std::move(p));
            refined = true;
            break;
        }
        rep.rounds.push_back(rr);
        if (!refined)
            return finish(Outcome::inconclusive, "no spurious transition yields a new separating predicate");
    }
    return finish(Outcome::inconclusive, "refinement round cap reached");
}

}  // namespace slar
