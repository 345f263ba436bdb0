#include <gtest/gtest.h>

#include <random>

#include "sewmimic/safety_filter.hpp"
#include "test_support.hpp"

using namespace sewmimic;
using namespace sewmimic::testing;

namespace {

BimanualPose rest_pose(const BimanualModel& m) {
    // Forearms forward, elbows at the sides.
    return {pose_towards(m.left, {0.0, 0.25, -0.3}, {0.28, 0.25, -0.3}),
            pose_towards(m.right, {0.0, -0.25, -0.3}, {0.28, -0.25, -0.3})};
}

// Forearms reaching across the midline at the same height.
BimanualPose crossed_pose(const BimanualModel& m, double reach = 0.2) {
    return {pose_towards(m.left, {0.2, 0.2, -0.15}, {0.35, -reach, -0.15}),
            pose_towards(m.right, {0.2, -0.2, -0.15}, {0.35, reach, -0.15})};
}

double max_keypoint_gap(const BimanualKeypoints& a, const BimanualKeypoints& b) {
    double g = 0.0;
    for (auto [x, y] : {std::pair{a.left, b.left}, std::pair{a.right, b.right}}) {
        g = std::max({g, norm(x.s - y.s), norm(x.e - y.e), norm(x.w - y.w), norm(x.t - y.t)});
    }
    return g;
}

TEST(MakeCapsules, SampleRadiiAndChainContinuity) {
    const auto m = sample_bimanual(WristType::perpendicular);
    std::mt19937_64 rng(1);
    for (int n = 0; n < 100; ++n) {
        const BimanualPose q{random_pose(m.left, rng), random_pose(m.right, rng)};
        const CapsuleSet c = make_capsules(m, bimanual_keypoints(m, q));
        EXPECT_EQ(c.links[0].r, 0.15);
        EXPECT_EQ(c.links[1].r, 0.06);
        EXPECT_EQ(c.links[3].r, 0.065);
        EXPECT_EQ(c.links[5].r, 0.07);
        for (std::size_t side : {0u, 1u}) {
            EXPECT_EQ(c.links[1 + side].p2, c.links[3 + side].p1);
            EXPECT_EQ(c.links[3 + side].p2, c.links[5 + side].p1);
        }
        for (std::size_t i = 0; i < kNumCapsules; ++i) EXPECT_EQ(static_cast<std::size_t>(c.links[i].tag), i);
    }
}

TEST(MakeCapsules, DegenerateHandIsASphere) {
    auto m = sample_bimanual(WristType::perpendicular);
    BimanualKeypoints k = bimanual_keypoints(m, rest_pose(m));
    k.right.t = k.right.w;
    const CapsuleSet c = make_capsules(m, k);
    EXPECT_EQ(c.links[6].p1, c.links[6].p2);
    EXPECT_TRUE(std::isfinite(min_distance(c)));
}

TEST(CollisionPairs, ExcludesAdjacentLinks) {
    const auto pairs = collision_pairs();
    EXPECT_EQ(pairs.size(), 21u - 6u);
    for (auto [i, j] : pairs) {
        EXPECT_FALSE(i == 0 && (j == 1 || j == 2));
        EXPECT_FALSE(i == 1 && j == 3);
        EXPECT_FALSE(i == 4 && j == 6);
    }
    EXPECT_EQ(collision_pairs(1).size(), 15u + 4u);
}

TEST(ContactGate, HysteresisOrdering) {
    const FilterParams p;
    // Approaching: inactive until below d_act.
    EXPECT_FALSE(contact_engaged(0.04, 0.0, p));
    EXPECT_FALSE(contact_engaged(0.021, 0.0, p));
    EXPECT_TRUE(contact_engaged(0.019, 0.0, p));
    // Engaged pairs stay engaged up to d_rel.
    EXPECT_TRUE(contact_engaged(0.03, 0.5, p));
    EXPECT_TRUE(contact_engaged(0.049, 0.5, p));
    EXPECT_FALSE(contact_engaged(0.05, 0.5, p));

    // Scripted oscillating distance with the multiplier the filter would carry.
    double lambda = 0.0;
    std::vector<int> engaged;
    for (double d : {0.06, 0.03, 0.015, 0.03, 0.045, 0.055, 0.03, 0.025, 0.019}) {
        const bool on = contact_engaged(d, lambda, p);
        lambda = on ? 1.0 : 0.0;
        engaged.push_back(on ? 1 : 0);
    }
    EXPECT_EQ(engaged, (std::vector<int>{0, 0, 1, 1, 1, 0, 0, 0, 1}));
}

TEST(XpbdContactStep, SymmetricPointHandsMoveEqually) {
    FilterParams p;
    Vec3 lw{0.3, 0.02, 0}, lt = lw, rw{0.3, -0.02, 0}, rt = rw;
    const ContactBody a{&lw, &lt, 1.0, 1.0, LinkKind::distal};
    const ContactBody b{&rw, &rt, 1.0, 1.0, LinkKind::distal};
    const Capsule ca{lw, lt, 0.07, CapsuleTag::hand_left};
    const Capsule cb{rw, rt, 0.07, CapsuleTag::hand_right};
    const ContactResult c = collision_check(ca, cb);
    ASSERT_LT(c.d, 0.0);
    const double lambda = xpbd_contact_step(a, b, c, 0.0, p);
    EXPECT_GT(lambda, 0.0);
    EXPECT_NEAR(lt.y - 0.02, -(rt.y + 0.02), 1e-15);
    EXPECT_GT(lt.y, 0.02);
    EXPECT_NEAR(lt.x, 0.3, 1e-15);
    EXPECT_NEAR(lt.z, 0.0, 1e-15);
    // One step nearly closes the gap to d_min (α is small).
    EXPECT_NEAR(norm(lt - rt) - 0.14, p.d_min, 1e-4);
}

TEST(XpbdContactStep, MultiplierNeverNegative) {
    FilterParams p;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int n = 0; n < 2000; ++n) {
        Vec3 a1{u(rng), u(rng), u(rng)}, a2{u(rng), u(rng), u(rng)}, b1{u(rng), u(rng), u(rng)}, b2{u(rng), u(rng), u(rng)};
        const ContactBody a{&a1, &a2, 1.0, 1.0, n % 2 ? LinkKind::upper : LinkKind::distal};
        const ContactBody b{&b1, &b2, 1.0, 1.0, LinkKind::distal};
        const ContactResult c = collision_check({a1, a2, 0.06, CapsuleTag::upper_left}, {b1, b2, 0.065, CapsuleTag::lower_right});
        const double lambda = xpbd_contact_step(a, b, c, std::uniform_real_distribution<double>(0, 2)(rng), p);
        EXPECT_GE(lambda, 0.0);
    }
}

TEST(XpbdIter, CollisionFreeSetUnchanged) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualKeypoints k0 = bimanual_keypoints(m, rest_pose(m));
    ASSERT_GT(min_distance(make_capsules(m, k0)), FilterParams{}.d_act);
    BimanualKeypoints k = k0;
    std::vector<double> lambda;
    EXPECT_FALSE(xpbd_iter(m, k, lambda, FilterParams{}));
    for (double l : lambda) EXPECT_EQ(l, 0.0);
    EXPECT_LT(max_keypoint_gap(k, k0), 1e-12);
}

TEST(XpbdIter, PenetratingForearmsAreSeparated) {
    const auto m = sample_bimanual(WristType::perpendicular);
    BimanualKeypoints k = bimanual_keypoints(m, crossed_pose(m));
    ASSERT_LT(min_distance(make_capsules(m, k)), 0.0);
    const FilterParams p;
    std::vector<double> lambda;
    for (int it = 0; it < p.n_iter; ++it) {
        xpbd_iter(m, k, lambda, p);
        for (double l : lambda) EXPECT_GE(l, 0.0);
    }
    EXPECT_GE(min_distance(make_capsules(m, k)), p.d_min - 1e-4);
}

TEST(XpbdLength, RestoresStretchedUpperArm) {
    const auto m = sample_bimanual(WristType::perpendicular);
    BimanualKeypoints k = bimanual_keypoints(m, rest_pose(m));
    const Vec3 offset = 0.1 * (k.right.e - k.right.s);
    k.right.e += offset;
    k.right.w += offset;
    k.right.t += offset;
    const Vec3 s = k.right.s;
    const FilterParams p;
    for (int it = 0; it < 20; ++it) xpbd_length_iter(m, k, p);
    EXPECT_NEAR(norm(k.right.e - k.right.s), m.right.limb_lengths.upper, 1e-6);
    EXPECT_NEAR(norm(k.right.w - k.right.e), m.right.limb_lengths.lower, 1e-6);
    EXPECT_EQ(k.right.s, s);
}

TEST(XpbdLength, ZeroLengthLinkSkipped) {
    const auto m = sample_bimanual(WristType::perpendicular);
    BimanualKeypoints k = bimanual_keypoints(m, rest_pose(m));
    k.right.t = k.right.w;
    const Vec3 w = k.right.w;
    xpbd_length_iter(m, k, FilterParams{});
    EXPECT_EQ(k.right.t, k.right.w);
    EXPECT_LT(norm(k.right.w - w), 1e-9);
}

TEST(RecoverTool, Cases) {
    EXPECT_LT(frobenius_distance(recover_tool(Rot3{}, {2, 0, 0}), Rot3{}), 1e-15);
    const Rot3 quarter = recover_tool(Rot3{}, {0, 1, 0});
    EXPECT_LT(frobenius_distance(quarter, rodrigues(Vec3::unit_z(), std::numbers::pi / 2)), 1e-12);
    const Rot3 flip = recover_tool(Rot3{}, {-1, 0, 0});
    EXPECT_LT(norm(flip.col(0) - Vec3{-1, 0, 0}), 1e-12);
    EXPECT_TRUE(is_rotation(flip));

    std::mt19937_64 rng(8);
    for (int n = 0; n < 500; ++n) {
        const Rot3 T = random_rotation(rng);
        const Vec3 t = 0.3 * random_unit(rng);
        const Rot3 H = recover_tool(T, t);
        EXPECT_LT(norm(H.col(0) - normalize(t)), 1e-12);
        EXPECT_TRUE(is_rotation(H));
    }
}

TEST(FindFirstCollision, NoMotion) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualPose q = rest_pose(m);
    const FirstCollision f = find_first_collision(m, q, q);
    EXPECT_EQ(f.n_interp, 1);
    EXPECT_FALSE(f.collided);
    EXPECT_EQ(max_keypoint_gap(f.keypoints, bimanual_keypoints(m, q)), 0.0);
}

TEST(FindFirstCollision, StopsAtFirstCollidingInterpolant) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualPose q0 = rest_pose(m);
    const BimanualPose q1 = crossed_pose(m, 0.3);
    const FirstCollision f = find_first_collision(m, q0, q1);
    ASSERT_TRUE(f.collided);
    EXPECT_GT(f.n_interp, 1);
    EXPECT_LT(f.index, f.n_interp);
    // Oracle: per-interpolant collision flags.
    const BimanualKeypoints k0 = bimanual_keypoints(m, q0);
    const BimanualKeypoints k1 = bimanual_keypoints(m, q1);
    int first = -1;
    for (int i = 1; i <= f.n_interp && first < 0; ++i) {
        if (in_collision(make_capsules(m, lerp(k0, k1, static_cast<double>(i) / f.n_interp)))) first = i;
    }
    EXPECT_EQ(first, f.index);
}

TEST(SafetyFilter, PassThroughWhenClear) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualPose q0 = rest_pose(m);
    BimanualPose q1 = q0;
    q1.left[3] -= 0.2;
    q1.right[6] += 0.3;
    const FilterResult r = safety_filter(m, q0, q1, FilterParams{});
    EXPECT_EQ(r.status, FilterStatus::safe);
    EXPECT_FALSE(r.active);
    EXPECT_LT(max_keypoint_gap(bimanual_keypoints(m, r.q), bimanual_keypoints(m, q1)), 1e-9);
    for (std::size_t i = 0; i < kNumJoints; ++i) {
        EXPECT_NEAR(r.q.left[i], q1.left[i], 1e-9);
        EXPECT_NEAR(r.q.right[i], q1.right[i], 1e-9);
    }
}

TEST(SafetyFilter, CrossingIsStoppedWithMargin) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualPose q0 = rest_pose(m);
    const FilterParams p;
    const FilterResult r = safety_filter(m, q0, crossed_pose(m, 0.3), p);
    ASSERT_EQ(r.status, FilterStatus::safe);
    EXPECT_TRUE(r.active);
    EXPECT_GE(r.min_distance, p.d_min - 0.005);
    EXPECT_LT(r.resolve_residual, 0.005);
    EXPECT_TRUE(within_limits(m.left, r.q.left));
    EXPECT_TRUE(within_limits(m.right, r.q.right));
}

TEST(SafetyFilter, IdempotentOnSafeOutput) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualPose q0 = rest_pose(m);
    const FilterParams p;
    const FilterResult r1 = safety_filter(m, q0, crossed_pose(m, 0.3), p);
    ASSERT_EQ(r1.status, FilterStatus::safe);
    const FilterResult r2 = safety_filter(m, r1.q, r1.q, p);
    ASSERT_EQ(r2.status, FilterStatus::safe);
    EXPECT_LT(max_keypoint_gap(bimanual_keypoints(m, r2.q), bimanual_keypoints(m, r1.q)), 0.005);
}

TEST(SafetyFilter, DeepPenetrationBeyondBudgetIsHeld) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const BimanualPose q = crossed_pose(m, 0.3);
    ASSERT_LT(min_distance(make_capsules(m, bimanual_keypoints(m, q))), -0.05);
    FilterParams p;
    p.n_iter = 1;
    const FilterResult r = safety_filter(m, q, q, p);
    EXPECT_EQ(r.status, FilterStatus::held);
    EXPECT_EQ(r.q, q);
}

TEST(SafetyFilter, LinkLengthsPreserved) {
    const auto m = sample_bimanual(WristType::perpendicular);
    const FilterResult r = safety_filter(m, rest_pose(m), crossed_pose(m, 0.3), FilterParams{});
    const BimanualKeypoints k = bimanual_keypoints(m, r.q);
    EXPECT_NEAR(norm(k.left.e - k.left.s), m.left.limb_lengths.upper, 1e-4);
    EXPECT_NEAR(norm(k.right.w - k.right.e), m.right.limb_lengths.lower, 1e-4);
    EXPECT_NEAR(norm(k.right.t - k.right.w), m.right.limb_lengths.hand, 1e-4);
}

TEST(FilterParams, Validation) {
    FilterParams p;
    EXPECT_NO_THROW(p.validate());
    p.d_act = 0.005;
    EXPECT_THROW(p.validate(), InvariantError);
    p = {};
    p.n_iter = 0;
    EXPECT_THROW(p.validate(), InvariantError);
}

}  // namespace
