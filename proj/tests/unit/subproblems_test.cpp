#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "sewmimic/subproblems.hpp"
#include "test_support.hpp"

using namespace sewmimic;
using namespace sewmimic::testing;

namespace {

constexpr double kPi = std::numbers::pi;

bool contains_angle(const AngleSet& s, double a, double tol = 1e-12) {
    for (double x : s) {
        if (std::abs(wrap_angle(x - a)) < tol) return true;
    }
    return false;
}

bool contains_pair(const AnglePairSet& s, double a, double b, double tol = 1e-12) {
    for (const auto& p : s) {
        if (std::abs(wrap_angle(p[0] - a)) < tol && std::abs(wrap_angle(p[1] - b)) < tol) return true;
    }
    return false;
}

TEST(Sp1, Aligned) { EXPECT_NEAR(sp1({1, 0, 0}, {1, 0, 0}, {0, 0, 1}), 0.0, 1e-15); }

TEST(Sp1, QuarterTurn) { EXPECT_NEAR(sp1({1, 0, 0}, {0, 1, 0}, {0, 0, 1}), kPi / 2, 1e-15); }

TEST(Sp1, CollinearWithAxisIsDegenerate) {
    EXPECT_FALSE(try_sp1({0, 0, 1}, {1, 0, 0}, {0, 0, 1}).has_value());
    EXPECT_THROW(sp1({0, 0, 1}, {1, 0, 0}, {0, 0, 1}), DegenerateError);
}

TEST(Sp1, BeatsCoarseGrid) {
    std::mt19937_64 rng(21);
    for (int n = 0; n < 100; ++n) {
        const Vec3 p1 = random_unit(rng), p2 = random_unit(rng), k = random_unit(rng);
        const double th = sp1(p1, p2, k);
        const double best = norm(rotate(k, th, p1) - p2);
        for (int g = -1000; g <= 1000; ++g) {
            EXPECT_LE(best, norm(rotate(k, g * kPi / 1000, p1) - p2) + 1e-12);
        }
    }
}

TEST(Sp4, TwoRoots) {
    const AngleSet s = sp4({1, 0, 0}, {0, 1, 0}, {0, 0, 1}, 0.5);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.exact);
    EXPECT_TRUE(contains_angle(s, kPi / 6));
    EXPECT_TRUE(contains_angle(s, 5 * kPi / 6));
}

TEST(Sp4, UnreachableGivesLeastSquaresAngle) {
    const AngleSet s = sp4({1, 0, 0}, {0, 1, 0}, {0, 0, 1}, 2.0);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_FALSE(s.exact);
    EXPECT_NEAR(s[0], kPi / 2, 1e-12);
}

TEST(Sp4, TangentRootsMerge) {
    const AngleSet s = sp4({1, 0, 0}, {0, 1, 0}, {0, 0, 1}, 1.0);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s[0], kPi / 2, 1e-7);
}

TEST(Sp4, RotationCannotChangeDistance) {
    const AngleSet s = sp4({0, 0, 1}, {0, 0, 1}, {0, 0, 1}, 0.5);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_FALSE(s.exact);
    EXPECT_DOUBLE_EQ(s[0], 0.0);
}

TEST(Sp4, RandomRootsSatisfyConstraint) {
    std::mt19937_64 rng(22);
    for (int n = 0; n < 200; ++n) {
        const Vec3 p = random_unit(rng), h = random_unit(rng), k = random_unit(rng);
        const double d = dot(h, rotate(k, random_angle(rng), p));
        const AngleSet s = sp4(p, h, k, d);
        ASSERT_TRUE(s.exact);
        for (double th : s) EXPECT_NEAR(dot(h, rotate(k, th, p)), d, 1e-9);
    }
}

TEST(Sp2, AlreadyAligned) {
    const AnglePairSet s = sp2({1, 0, 0}, {1, 0, 0}, {0, 0, 1}, {0, 0, 1});
    EXPECT_TRUE(s.exact);
    EXPECT_TRUE(contains_pair(s, 0.0, 0.0));
}

TEST(Sp2, CircleIntersection) {
    const AnglePairSet s = sp2({1, 0, 0}, {0, 0, 1}, {0, 0, 1}, {1, 0, 0});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.exact);
    EXPECT_TRUE(contains_pair(s, kPi / 2, -kPi / 2));
    EXPECT_TRUE(contains_pair(s, -kPi / 2, kPi / 2));
}

TEST(Sp2, ExactPairsMeet) {
    std::mt19937_64 rng(23);
    for (int n = 0; n < 500; ++n) {
        const Vec3 k1 = random_unit(rng), k2 = random_unit(rng);
        const Vec3 p1 = random_unit(rng);
        // p2 chosen so a solution exists.
        const Vec3 p2 = rotate(k2, -random_angle(rng), rotate(k1, random_angle(rng), p1));
        const AnglePairSet s = sp2(p1, p2, k1, k2);
        ASSERT_TRUE(s.exact);
        ASSERT_FALSE(s.empty());
        for (const auto& p : s) EXPECT_LT(norm(rotate(k1, p[0], p1) - rotate(k2, p[1], p2)), 1e-9);
    }
}

TEST(Sp2, NormalizesInputs) {
    const AnglePairSet a = sp2({2, 0, 0}, {0, 0, 0.5}, {0, 0, 1}, {1, 0, 0});
    EXPECT_TRUE(contains_pair(a, kPi / 2, -kPi / 2));
}

TEST(Sp2, InexactReturnsLocalMinimum) {
    std::mt19937_64 rng(24);
    int inexact = 0;
    for (int n = 0; n < 200; ++n) {
        const Vec3 p1 = random_unit(rng), p2 = random_unit(rng), k1 = random_unit(rng), k2 = random_unit(rng);
        const AnglePairSet s = sp2(p1, p2, k1, k2);
        if (s.exact) continue;
        ++inexact;
        for (const auto& p : s) {
            const double f0 = norm(rotate(k1, p[0], p1) - rotate(k2, p[1], p2));
            for (double da : {-1e-3, 0.0, 1e-3}) {
                for (double db : {-1e-3, 0.0, 1e-3}) {
                    EXPECT_LE(f0, norm(rotate(k1, p[0] + da, p1) - rotate(k2, p[1] + db, p2)) + 1e-12);
                }
            }
        }
    }
    EXPECT_GT(inexact, 0);
}

}  // namespace
