#include <gtest/gtest.h>

#include <random>

#include "slar/psa.hpp"
#include "support.hpp"

using namespace slar;
using fixtures::trace_of;

namespace {

std::vector<Word> labels(const StationaryChain& c) {
    std::vector<Word> out;
    for (const auto& s : c.states) out.push_back(s.label);
    return out;
}

// Pr(1) is 0.5 after a 1, 0.1 after 00 and 0.9 after 10.
AbstractTrace three_context_source(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution after1(0.5), after00(0.1), after10(0.9);
    std::vector<Symbol> s{1, 0};
    while (s.size() < n) {
        bool one;
        if (s.back() == 1)
            one = after1(rng);
        else
            one = s[s.size() - 2] == 0 ? after00(rng) : after10(rng);
        s.push_back(one ? 1 : 0);
    }
    return trace_of(std::move(s));
}

void expect_longest_suffix_rule(const StationaryChain& c) {
    for (std::size_t i = 0; i < c.size(); ++i)
        for (const auto& t : c.states[i].out) {
            Word h = c.states[i].label;
            h.push_back(t.symbol);
            std::size_t best = c.size();
            for (std::size_t j = 0; j < c.size(); ++j)
                if (is_suffix(c.states[j].label, h) && (best == c.size() || c.states[j].label.size() > c.states[best].label.size()))
                    best = j;
            EXPECT_EQ(t.target, best) << label_string(h);
        }
}

}  // namespace

TEST(PstToPsa, Alternation) {
    std::vector<Symbol> s;
    for (int i = 0; i < 100; ++i) s.push_back(i % 2);
    const auto t = trace_of(s);
    const SuffixStats st(t, 10);
    const auto c = pst_to_psa(grow_pst(st, PstOptions::with_epsilon(0.01)), st);
    ASSERT_EQ(labels(c), (std::vector<Word>{{0}, {1}}));
    EXPECT_DOUBLE_EQ(c.probability(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(c.probability(1, 0), 1.0);
    c.validate();
}

TEST(PstToPsa, RootOnly) {
    PST p;
    p.alphabet = {0, 1};
    p.nodes[{}] = {{0, 0.7}, {1, 0.3}};
    const SuffixStats st(trace_of({0, 0, 1, 0}), 1);
    const auto c = pst_to_psa(p, st);
    ASSERT_EQ(c.size(), 1u);
    ASSERT_EQ(c.states[0].out.size(), 2u);
    EXPECT_DOUBLE_EQ(c.probability(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(c.states[0].out[0].probability, 0.7);
    EXPECT_DOUBLE_EQ(c.states[0].out[1].probability, 0.3);
    c.validate();
}

TEST(PstToPsa, ThreeContextLabels) {
    const auto t = three_context_source(100000, 8);
    const SuffixStats st(t, 10);
    const auto c = pst_to_psa(grow_pst(st, PstOptions::with_epsilon(0.01)), st);
    ASSERT_EQ(labels(c), (std::vector<Word>{{1}, {0, 0}, {1, 0}}));
    const auto s10 = *c.find({1, 0});
    EXPECT_EQ(c.transition(s10, 1)->target, *c.find({1}));
    EXPECT_EQ(c.transition(s10, 0)->target, *c.find({0, 0}));
    EXPECT_NEAR(c.transition(s10, 1)->probability, 0.9, 0.02);
    EXPECT_NEAR(c.transition(*c.find({0, 0}), 1)->probability, 0.1, 0.02);
    c.validate();
    expect_longest_suffix_rule(c);
}

TEST(PstToPsa, ExtendedLeavesInheritLaw) {
    // <1> is internal through <01>; completing it adds <11>, which inherits <1>'s law.
    PST p;
    p.alphabet = {0, 1};
    p.nodes[{}] = {{0, 0.5}, {1, 0.5}};
    p.nodes[{0}] = {{0, 0.2}, {1, 0.8}};
    p.nodes[{1}] = {{0, 0.6}, {1, 0.4}};
    p.nodes[{0, 1}] = {{0, 0.9}, {1, 0.1}};
    const SuffixStats st(trace_of({0, 0, 1, 1, 0, 1, 0}), 3);
    const auto c = pst_to_psa(p, st);
    ASSERT_EQ(labels(c), (std::vector<Word>{{0}, {0, 1}, {1, 1}}));
    const auto s11 = *c.find({1, 1});
    EXPECT_DOUBLE_EQ(c.transition(s11, 0)->probability, 0.6);
    EXPECT_DOUBLE_EQ(c.transition(s11, 1)->probability, 0.4);
    EXPECT_EQ(c.transition(*c.find({0}), 1)->target, *c.find({0, 1}));
    c.validate();
    expect_longest_suffix_rule(c);
}

TEST(PstToPsa, LeafExtendedWhenSuccessorIsInternal) {
    // From leaf <1> on symbol 0 the history ends in <10>, which is internal (parent of <010>),
    // so <1> cannot pick a successor and is split into <01> and <11>.
    PST p;
    p.alphabet = {0, 1};
    p.nodes[{}] = {{0, 0.5}, {1, 0.5}};
    p.nodes[{0}] = {{0, 0.5}, {1, 0.5}};
    p.nodes[{1}] = {{0, 0.4}, {1, 0.6}};
    p.nodes[{1, 0}] = {{0, 0.3}, {1, 0.7}};
    p.nodes[{0, 1, 0}] = {{0, 0.9}, {1, 0.1}};
    std::vector<Symbol> s;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) s.push_back(rng() % 2);
    const SuffixStats st(trace_of(s), 4);
    const auto c = pst_to_psa(p, st);
    ASSERT_EQ(labels(c), (std::vector<Word>{{0, 0}, {0, 1}, {1, 1}, {0, 1, 0}, {1, 1, 0}}));
    EXPECT_DOUBLE_EQ(c.transition(*c.find({0, 1}), 1)->probability, 0.6);
    EXPECT_DOUBLE_EQ(c.transition(*c.find({1, 1, 0}), 1)->probability, 0.7);
    EXPECT_EQ(c.transition(*c.find({0, 1}), 0)->target, *c.find({0, 1, 0}));
    c.validate();
    expect_longest_suffix_rule(c);
}

TEST(PstToPsa, RandomSourcesAreWellFormed) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<Symbol> s{0};
        std::uniform_real_distribution<double> u(0, 1);
        const double a = u(rng), b = u(rng), c3 = u(rng);
        while (s.size() < 20000) {
            const double p = s.back() == 0 ? a : (s.size() > 1 && s[s.size() - 2] == 2 ? b : c3);
            s.push_back(u(rng) < p ? 2 : (u(rng) < 0.5 ? 0 : 1));
        }
        const auto t = trace_of(s, 2);
        const SuffixStats st(t, 10);
        const auto chain = pst_to_psa(grow_pst(st, PstOptions::with_epsilon(0.002)), st);
        chain.validate();
        expect_longest_suffix_rule(chain);
    }
}

TEST(StateMatcher, LongestSuffix) {
    StationaryChain c;
    c.alphabet = {0, 1};
    c.states = {{{1}, {}}, {{0, 0}, {}}, {{1, 0}, {}}};
    const StateMatcher m(c);
    const std::vector<Symbol> h1{1, 0, 1}, h2{1, 0, 0}, h3{0}, h4{0, 1, 0};
    EXPECT_EQ(m.match(h1), 0u);
    EXPECT_EQ(m.match(h2), 1u);
    EXPECT_FALSE(m.match(h3).has_value());
    EXPECT_EQ(m.match(h4), 2u);
}
