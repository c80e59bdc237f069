#include <reactsent/rng.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include <gtest/gtest.h>

using namespace reactsent;

TEST(Fnv1a64, MatchesPublishedVectors) {
    EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xAF63DC4C8601EC8CULL);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171F73967E8ULL);
}

TEST(Fnv1a64, SeedChainsHashes) {
    const uint64_t once = fnv1a64("ab");
    const uint64_t chained = fnv1a64("b", fnv1a64("a"));
    EXPECT_EQ(once, chained);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(Rng, DifferentSeedsDiverge) {
    Rng a(1), b(2);
    bool differ = false;
    for (int i = 0; i < 10 && !differ; ++i) {
        differ = a.next_u64() != b.next_u64();
    }
    EXPECT_TRUE(differ);
}

TEST(Rng, ForkIsDeterministicAndTagged) {
    Rng root(7);
    Rng a = root.fork("init");
    Rng b = root.fork("init");
    Rng c = root.fork("batches");
    EXPECT_EQ(a.next_u64(), b.next_u64());
    Rng a2 = Rng(7).fork("init");
    EXPECT_NE(a2.next_u64(), c.next_u64());
}

TEST(Rng, ForkDoesNotDisturbParentStream) {
    Rng a(99), b(99);
    (void)a.fork("anything");
    (void)a.fork("else");
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(Rng, NextDoubleInUnitInterval) {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.next_double();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(Rng, NextDoubleRangeRespectsBounds) {
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.next_double(-0.1, 0.1);
        EXPECT_GE(v, -0.1);
        EXPECT_LT(v, 0.1);
    }
}

TEST(Rng, NextBelowStaysInBoundAndCoversValues) {
    Rng rng(5);
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = rng.next_below(7);
        EXPECT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
    EXPECT_EQ(rng.next_below(1), 0u);
}

TEST(Rng, ShuffleIsSeededPermutation) {
    std::vector<int> base(50);
    for (size_t i = 0; i < base.size(); ++i) base[i] = int(i);

    std::vector<int> a = base, b = base, c = base;
    Rng(11).shuffle(a);
    Rng(11).shuffle(b);
    Rng(12).shuffle(c);

    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_NE(a, base);

    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, base);
}

TEST(Rng, ShuffleHandlesTinyInputs) {
    std::vector<int> empty;
    std::vector<int> one{5};
    Rng rng(1);
    rng.shuffle(empty);
    rng.shuffle(one);
    EXPECT_TRUE(empty.empty());
    EXPECT_EQ(one, std::vector<int>{5});
}
