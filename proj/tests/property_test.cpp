#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "slar/property.hpp"

using namespace slar;

TEST(ParseProperty, Examples) {
    const auto p = parse_property("LIT101 > 1100 @ r=0.1535");
    EXPECT_EQ(p.variable, "LIT101");
    EXPECT_EQ(p.sense, Sense::greater);
    EXPECT_EQ(p.bound, 1100.0);
    EXPECT_EQ(p.threshold, 0.1535);

    const auto q = parse_property("FIT101 < 2.5 @ r=0.611");
    EXPECT_EQ(q.sense, Sense::less);
    EXPECT_EQ(q.bound, 2.5);
    EXPECT_EQ(q.threshold, 0.611);

    EXPECT_EQ(parse_property("  AIT202<-3e1@r=1 ").bound, -30.0);
}

TEST(ParseProperty, Errors) {
    try {
        parse_property("LIT101 >= 1100 @ r=0.1");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.position(), 7u);
    }
    EXPECT_THROW(parse_property("LIT101 > 1100"), SyntaxError);
    EXPECT_THROW(parse_property("LIT101 > @ r=0.1"), SyntaxError);
    EXPECT_THROW(parse_property("LIT101 > 1100 @ q=0.1"), SyntaxError);
    EXPECT_THROW(parse_property("LIT101 > 1100 @ r=0.1 extra"), SyntaxError);
    EXPECT_THROW(parse_property("LIT101 > 1100 @ r=1.5"), RangeError);
    EXPECT_THROW(parse_property("LIT101 > 1100 @ r=-0.1"), RangeError);
}

TEST(ParseProperty, PrintRoundTrip) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> bound(-1e4, 1e4), r(0, 1);
    for (int i = 0; i < 500; ++i) {
        const SafetyProperty p{"V" + std::to_string(i), i % 2 ? Sense::greater : Sense::less, bound(rng), r(rng)};
        EXPECT_EQ(parse_property(to_string(p)), p);
    }
}

TEST(ParseProperty, List) {
    std::istringstream in("# header\nLIT101 > 1100 @ r=0.1535\n\n  FIT101 < 2.5 @ r=0.611 # trailing\n");
    const auto list = parse_property_list(in);
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[1].variable, "FIT101");
}
