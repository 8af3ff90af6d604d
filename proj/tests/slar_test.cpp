#include <gtest/gtest.h>

#include "slar/all.hpp"
#include "support.hpp"

using namespace slar;

namespace {

struct Logs {
    SyntheticSpec spec;
    SyntheticLog train, test;
};

Logs threshold_logs(std::size_t n) {
    auto s = fixtures::threshold_fixture(n, 7);
    auto train = generate_synthetic_log(s);
    s.seed = 8;
    auto test = generate_synthetic_log(s);
    return {s, std::move(train), std::move(test)};
}

}  // namespace

TEST(RunSlar, ZeroSupportIsTriviallyVerified) {
    const auto s = fixtures::bernoulli_fixture(0.0, 2000, 1);
    const auto a = generate_synthetic_log(s);
    const auto rep = run_slar(a.log, a.log, parse_property("y > 50 @ r=0.1"), SlarConfig{});
    EXPECT_EQ(rep.outcome, Outcome::verified);
    EXPECT_TRUE(rep.zero_support);
    EXPECT_EQ(rep.model_size, 1u);
    EXPECT_FALSE(rep.warnings.empty());
    EXPECT_EQ(rep.p_learn, 0.0);
}

TEST(RunSlar, ViolationCarriesConfidence) {
    auto s = fixtures::bernoulli_fixture(0.3, 20000, 1);
    const auto train = generate_synthetic_log(s);
    s.seed = 2;
    const auto test = generate_synthetic_log(s);
    const auto rep = run_slar(train.log, test.log, parse_property("y > 50 @ r=0.1"), SlarConfig{});
    EXPECT_EQ(rep.outcome, Outcome::violated);
    ASSERT_TRUE(rep.confidence);
    EXPECT_GT(*rep.confidence, 0.99);
    EXPECT_FALSE(rep.chain);
    ASSERT_TRUE(rep.p_test);
    EXPECT_EQ(*rep.p_test, static_cast<double>(rep.test_unsafe) / static_cast<double>(rep.test_length));
}

TEST(RunSlar, RefinementInvariants) {
    const auto logs = threshold_logs(30000);
    const double truth = ground_truth_probability(logs.spec, logs.train.stationary, parse_predicate("y > 50"));
    const SafetyProperty prop{"y", Sense::greater, 50, threshold_with_margin(truth)};
    const auto rep = run_slar(logs.train.log, logs.test.log, prop, SlarConfig{});
    ASSERT_EQ(rep.outcome, Outcome::verified) << rep.reason;
    ASSERT_TRUE(rep.chain);

    // Predicate set grows by one per refinement round.
    for (std::size_t i = 0; i < rep.rounds.size(); ++i) EXPECT_EQ(rep.rounds[i].predicate_count, i + 1);
    EXPECT_EQ(rep.predicates.size(), rep.rounds.size());

    // The evidence model, reloaded from its serialized form, still satisfies the bound.
    const auto doc = import_model(export_model(*rep.chain, rep.predicates, ModelFormat::json));
    EXPECT_LE(unsafe_probability(doc.chain, prop, doc.predicates), prop.threshold);
    EXPECT_NEAR(unsafe_probability(doc.chain, prop, doc.predicates), rep.p_learn, 1e-12);

    // Reported P_test matches the recomputed abstraction of the testing log.
    ASSERT_TRUE(rep.p_test);
    EXPECT_EQ(*rep.p_test, empirical_unsafe_probability(abstract_trace(logs.test.log, rep.predicates), 0));
}

TEST(RunSlar, Reproducible) {
    const auto logs = threshold_logs(20000);
    const SafetyProperty prop{"y", Sense::greater, 50, 0.14};
    const auto a = report_to_json(run_slar(logs.train.log, logs.test.log, prop, SlarConfig{}));
    const auto b = report_to_json(run_slar(logs.train.log, logs.test.log, prop, SlarConfig{}));
    auto strip = [](json j) {
        j.erase("seconds");
        return j.dump();
    };
    EXPECT_EQ(strip(a), strip(b));
}

TEST(RunSlar, RoundCapGivesInconclusive) {
    const auto logs = threshold_logs(20000);
    SlarConfig cfg;
    cfg.max_rounds = 1;
    const auto rep = run_slar(logs.train.log, logs.test.log, SafetyProperty{"y", Sense::greater, 50, 0.125}, cfg);
    EXPECT_EQ(rep.outcome, Outcome::inconclusive);
    EXPECT_EQ(rep.rounds.size(), 1u);
}

TEST(RunSlar, InputErrors) {
    const auto logs = threshold_logs(1000);
    EXPECT_THROW(run_slar(logs.train.log, logs.test.log, SafetyProperty{"nope", Sense::greater, 1, 0.1}, SlarConfig{}),
                 UnknownVariable);
    const auto other = fixtures::log_of({"z"}, {{1}, {2}});
    EXPECT_THROW(run_slar(logs.train.log, other, SafetyProperty{"y", Sense::greater, 50, 0.1}, SlarConfig{}),
                 InvalidSchema);
    SlarConfig bad;
    bad.max_rounds = 0;
    EXPECT_THROW(run_slar(logs.train.log, logs.test.log, SafetyProperty{"y", Sense::greater, 50, 0.1}, bad), Error);
}

TEST(RunSlar, StrideDownsamples) {
    const auto logs = threshold_logs(20000);
    SlarConfig cfg;
    cfg.stride = 4;
    const auto rep = run_slar(logs.train.log, logs.test.log, SafetyProperty{"y", Sense::greater, 50, 0.9}, cfg);
    EXPECT_EQ(rep.outcome, Outcome::verified);
    EXPECT_EQ(rep.test_length, 5000u);
}

TEST(LearnModel, RetriesWithStricterEpsilon) {
    // Rare, memoryless violations: the first tree stays at the root.
    auto s = fixtures::bernoulli_fixture(0.004, 20000, 3);
    const auto g = generate_synthetic_log(s);
    const PredicateSet p({parse_predicate("y > 50")});
    const auto m = learn_model(g.log, p, 0, SlarConfig{});
    EXPECT_TRUE(m.epsilon_retried);
    EXPECT_DOUBLE_EQ(m.epsilon, 0.002);
}

TEST(Threshold, Margin) { EXPECT_DOUBLE_EQ(threshold_with_margin(0.25), 0.3); }
