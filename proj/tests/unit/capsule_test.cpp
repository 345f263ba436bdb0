#include <gtest/gtest.h>

#include <random>

#include "sewmimic/capsule.hpp"
#include "test_support.hpp"

using namespace sewmimic;
using namespace sewmimic::testing;

namespace {

TEST(Capsule, PointCapsulesAreSpheres) {
    const Capsule a{{0, 0, 0}, {0, 0, 0}, 0.3, CapsuleTag::hand_left};
    const Capsule b{{1, 0, 0}, {1, 0, 0}, 0.3, CapsuleTag::hand_right};
    EXPECT_NEAR(collision_check(a, b).d, 0.4, 1e-15);
    const Capsule c{{0.5, 0, 0}, {0.5, 0, 0}, 0.3, CapsuleTag::hand_right};
    EXPECT_NEAR(collision_check(a, c).d, -0.1, 1e-15);
}

TEST(Capsule, NormalsAreTauScaledAndOpposed) {
    const Capsule a{{0, 0, 0}, {1, 0, 0}, 0.1, CapsuleTag::lower_left};
    const Capsule b{{0.25, -1, 0.5}, {0.25, 1, 0.5}, 0.1, CapsuleTag::lower_right};
    const ContactResult r = collision_check(a, b);
    EXPECT_NEAR(r.tau_i, 0.25, 1e-12);
    EXPECT_NEAR(r.tau_j, 0.5, 1e-12);
    EXPECT_NEAR(r.n_i.z, 0.25, 1e-12);
    EXPECT_NEAR(r.n_j.z, -0.5, 1e-12);
    EXPECT_NEAR(r.d, 0.3, 1e-12);
}

TEST(Capsule, ParallelOverlapPicksMidpoint) {
    const SegmentClosest c = closest_points({0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {2, 1, 0});
    EXPECT_NEAR(c.s, 0.75, 1e-12);
    EXPECT_NEAR(c.distance, 1.0, 1e-12);
    EXPECT_NEAR(c.c2.x, 0.75, 1e-12);
}

TEST(Capsule, ParallelDisjointUsesEndpoints) {
    const SegmentClosest c = closest_points({0, 0, 0}, {1, 0, 0}, {2, 1, 0}, {3, 1, 0});
    EXPECT_NEAR(c.distance, std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(c.s, 1.0, 1e-12);
    EXPECT_NEAR(c.t, 0.0, 1e-12);
}

TEST(Capsule, IntersectingAxesStillGiveDirection) {
    const Capsule a{{-1, 0, 0}, {1, 0, 0}, 0.1, CapsuleTag::lower_left};
    const Capsule b{{0, -1, 0}, {0, 1, 0}, 0.1, CapsuleTag::lower_right};
    const ContactResult r = collision_check(a, b);
    EXPECT_NEAR(r.d, -0.2, 1e-12);
    EXPECT_NEAR(norm(r.n_i), 0.5, 1e-12);
    EXPECT_NEAR(dot(r.n_i, r.n_j), -0.25, 1e-12);
}

// Dense sampling oracle: 10³ points per segment.
double sampled_distance(const Capsule& a, const Capsule& b) {
    constexpr int n = 1000;
    std::vector<Vec3> pb(n + 1);
    for (int j = 0; j <= n; ++j) pb[j] = b.p1 + (static_cast<double>(j) / n) * (b.p2 - b.p1);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const Vec3 x = a.p1 + (static_cast<double>(i) / n) * (a.p2 - a.p1);
        for (const Vec3& y : pb) best = std::min(best, squared_norm(x - y));
    }
    return std::sqrt(best) - a.r - b.r;
}

TEST(Capsule, MatchesSamplingOracle) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> rad(0.01, 0.1);
    for (int n = 0; n < 1000; ++n) {
        auto pt = [&] { return Vec3{u(rng), u(rng), u(rng)}; };
        const Capsule a{pt(), pt(), rad(rng), CapsuleTag::lower_left};
        Capsule b{pt(), pt(), rad(rng), CapsuleTag::lower_right};
        if (n % 10 == 0) b.p2 = b.p1 + 0.01 * (a.p2 - a.p1);  // near-parallel cases
        const ContactResult r = collision_check(a, b);
        // The sampled distance can only overestimate, by at most half a sample spacing.
        const double oracle = sampled_distance(a, b);
        EXPECT_LE(r.d, oracle + 1e-12);
        EXPECT_NEAR(r.d, oracle, 1e-3);
        EXPECT_NEAR(norm(r.c_j - r.c_i) - a.r - b.r, r.d, 1e-12);
    }
}

}  // namespace
