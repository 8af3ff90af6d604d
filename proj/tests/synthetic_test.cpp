#include <gtest/gtest.h>

#include <fstream>

#include "slar/synthetic.hpp"
#include "support.hpp"

using namespace slar;

TEST(Synthetic, UniformGroundTruth) {
    SyntheticSpec s;
    s.variables = {"x"};
    s.transitions = {{1.0}};
    s.emissions = {{Emission::uniform(0, 1)}};
    s.length = 10;
    const auto g = generate_synthetic_log(s);
    EXPECT_DOUBLE_EQ(ground_truth_probability(s, g.stationary, parse_predicate("x > 0.25")), 0.75);
    EXPECT_DOUBLE_EQ(ground_truth_probability(s, g.stationary, parse_predicate("-2*x >= -0.5")), 0.25);
}

TEST(Synthetic, TwoStateGroundTruth) {
    SyntheticSpec s;
    s.variables = {"x"};
    s.transitions = {{0.9, 0.1}, {0.5, 0.5}};
    s.emissions = {{Emission::constant(2)}, {Emission::constant(0)}};
    s.length = 10;
    const auto g = generate_synthetic_log(s);
    EXPECT_NEAR(ground_truth_probability(s, g.stationary, parse_predicate("x > 1")), 5.0 / 6.0, 1e-14);
}

TEST(Synthetic, Deterministic) {
    const auto s = fixtures::threshold_fixture(2000, 77);
    const auto a = generate_synthetic_log(s);
    const auto b = generate_synthetic_log(s);
    EXPECT_EQ(a.hidden, b.hidden);
    for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].values, b.log[i].values);
    auto other = s;
    other.seed = 78;
    EXPECT_NE(generate_synthetic_log(other).hidden, a.hidden);
}

namespace {

// Standard error of a mean over a correlated indicator sequence, from 100 batch means.
double batch_standard_error(const AbstractTrace& t) {
    const std::size_t batches = 100, len = t.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = b * len; i < (b + 1) * len; ++i) means[b] += t.symbols[i] & 1u;
        means[b] /= static_cast<double>(len);
    }
    double mean = 0, var = 0;
    for (double m : means) mean += m / batches;
    for (double m : means) var += (m - mean) * (m - mean) / (batches - 1);
    return std::sqrt(var / batches);
}

}  // namespace

TEST(Synthetic, EmpiricalWithinThreeStandardErrors) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto s = fixtures::bernoulli_fixture(0.3, 100000, seed);
        const auto g = generate_synthetic_log(s);
        const auto pred = parse_predicate("y > 50");
        const double truth = ground_truth_probability(s, g.stationary, pred);
        const double emp = empirical_unsafe_probability(abstract_trace(g.log, PredicateSet({pred})), 0);
        EXPECT_NEAR(emp, truth, 3 * std::sqrt(truth * (1 - truth) / 1e5));
    }
    // The hidden chain is correlated, so the standard error comes from batch means.
    const auto s = fixtures::threshold_fixture(100000, 5);
    const auto g = generate_synthetic_log(s);
    for (const char* text : {"y > 50", "x > 60", "x < 20"}) {
        const auto pred = parse_predicate(text);
        const auto t = abstract_trace(g.log, PredicateSet({pred}));
        const double truth = ground_truth_probability(s, g.stationary, pred);
        EXPECT_NEAR(empirical_unsafe_probability(t, 0), truth, 3 * batch_standard_error(t)) << text;
    }
}

TEST(Synthetic, NormalEmission) {
    const auto e = Emission::normal(10, 2);
    EXPECT_NEAR(e.probability(Sense::greater, 10), 0.5, 1e-15);
    EXPECT_NEAR(e.probability(Sense::less, 12), 0.8413447460685429, 1e-12);
}

TEST(Synthetic, InvalidSpecs) {
    SyntheticSpec s;
    s.variables = {"x"};
    s.transitions = {{0.5, 0.4}, {0.5, 0.5}};
    s.emissions = {{Emission::uniform(0, 1)}, {Emission::uniform(0, 1)}};
    s.length = 10;
    EXPECT_THROW(generate_synthetic_log(s), InvalidSpec);
    s.transitions = {{0.5, 0.5}, {0.5, 0.5}};
    s.length = 1;
    EXPECT_THROW(generate_synthetic_log(s), InvalidSpec);
    s.length = 10;
    s.emissions[1][0] = Emission::normal(0, -1);
    EXPECT_THROW(generate_synthetic_log(s), InvalidSpec);
}

TEST(Synthetic, SpecFromJson) {
    std::ifstream in(SLAR_SAMPLE_DATA "/threshold_system.json");
    ASSERT_TRUE(in);
    const auto s = synthetic_spec_from_json(json::parse(in));
    const auto f = fixtures::threshold_fixture(100000, 7);
    EXPECT_EQ(s.transitions, f.transitions);
    EXPECT_EQ(s.variables, f.variables);
    EXPECT_EQ(generate_synthetic_log(s).hidden, generate_synthetic_log(f).hidden);
}
