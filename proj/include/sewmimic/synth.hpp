#pragma once

// Synthetic keypoint trajectories: the bimanual "rolling punch" and
// robot-generated round-trip motion.

#include <cmath>
#include <numbers>
#include <random>

#include "sewmimic/safety_filter.hpp"
#include "sewmimic/trajectory.hpp"

namespace sewmimic {

/// Hand frame with x along the forearm and z (thumb) as close to `up` as possible.
inline Rot3 forearm_hand(const Vec3& e, const Vec3& w, const Vec3& up = Vec3::unit_z()) {
    const Vec3 x = normalize(w - e);
    Vec3 z = up - dot(up, x) * x;
    if (norm(z) < 1e-6) z = Vec3::unit_x() - dot(Vec3::unit_x(), x) * x;
    z = normalize(z);
    return Rot3::from_columns(x, cross(z, x), z);
}

/// Elbow of a two-link arm from shoulder s to wrist w, bent toward `pole`.
inline Vec3 two_link_elbow(const Vec3& s, const Vec3& w, double upper, double lower, const Vec3& pole) {
    const Vec3 sw = w - s;
    const double d = std::clamp(norm(sw), std::abs(upper - lower) + 1e-6, upper + lower - 1e-6);
    const Vec3 u = normalize(sw);
    const double along = (upper * upper - lower * lower + d * d) / (2.0 * d);
    const double h = std::sqrt(std::max(0.0, upper * upper - along * along));
    Vec3 p = pole - dot(pole, u) * u;
    p = norm(p) > 1e-9 ? normalize(p) : detail::any_perpendicular(u);
    return s + along * u + h * p;
}

/// Both wrists circle in the sagittal plane in front of the chest, in
/// opposite phase, a few centimetres either side of the midline. The
/// forearm capsules overlap for roughly half of each cycle.
struct RollingPunchParams {
    double duration = 10.0;  // s
    double rate = 200.0;     // Hz
    double rotations = 10.0;
    double circle_radius = 0.10;  // m
    double center_forward = 0.36;  // circle center ahead of the shoulders, m
    double center_height = -0.22;  // circle center relative to the shoulders, m
    double midline_gap = 0.03;     // lateral wrist offset from the midline, m
    double shoulder_half_width = 0.25;
    double upper = 0.30;
    double lower = 0.28;
    double torso_depth = 0.5;  // torso anchor below the shoulder midpoint
    Vec3 torso_drift;          // stream-frame translation of the whole body, m/s
};

inline KeypointTrajectory synth_rolling_punch(const RollingPunchParams& p = {}) {
    if (!(p.rate > 0.0)) throw InvariantError("rolling punch: rate must be positive");
    KeypointTrajectory traj;
    traj.frame = TrajectoryFrame::stream;
    const auto n = static_cast<std::size_t>(std::llround(p.duration * p.rate));
    traj.records.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / p.rate;
        const double phase = p.duration > 0.0 ? 2.0 * std::numbers::pi * p.rotations * t / p.duration : 0.0;
        const Vec3 offset = t * p.torso_drift;

        auto arm = [&](double side, double ph) {
            RawArm a;
            a.s = Vec3{0.0, side * p.shoulder_half_width, 0.0};
            a.w = Vec3{p.center_forward + p.circle_radius * std::cos(ph), side * p.midline_gap,
                       p.center_height + p.circle_radius * std::sin(ph)};
            a.e = two_link_elbow(a.s, a.w, p.upper, p.lower, Vec3{0.0, side * 0.5, -1.0});
            a.hand = forearm_hand(a.e, a.w);
            a.s += offset;
            a.e += offset;
            a.w += offset;
            return a;
        };
        TrajectoryRecord rec;
        rec.raw.t = t;
        rec.raw.torso = Vec3{0.0, 0.0, -p.torso_depth} + offset;
        rec.raw.left = arm(1.0, phase);
        rec.raw.right = arm(-1.0, phase + std::numbers::pi);
        traj.records.push_back(rec);
    }
    return traj;
}

/// Body-frame trajectory whose keypoints and hand frames come from robot FK
/// along a bounded random walk in joint space, so every frame is exactly
/// reachable. |q6| is kept below `q6_bound`.
inline KeypointTrajectory synth_fk_walk(const BimanualModel& m, std::size_t frames, std::uint64_t seed,
                                        double step = 0.02, double q6_bound = 80.0 * std::numbers::pi / 180.0,
                                        double rate = 200.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto lo = [&](const RobotArmModel& a, int i) { return i == 6 ? std::max(a.lower(i), -q6_bound) : a.lower(i); };
    auto hi = [&](const RobotArmModel& a, int i) { return i == 6 ? std::min(a.upper(i), q6_bound) : a.upper(i); };
    auto start = [&](const RobotArmModel& a) {
        JointVector q;
        for (int i = 1; i <= kNumJoints; ++i) q[static_cast<std::size_t>(i - 1)] = 0.5 * (lo(a, i) + hi(a, i)) + 0.25 * (hi(a, i) - lo(a, i)) * unit(rng);
        return q;
    };
    auto advance = [&](const RobotArmModel& a, JointVector& q) {
        for (int i = 1; i <= kNumJoints; ++i) {
            double& x = q[static_cast<std::size_t>(i - 1)];
            x += step * unit(rng);
            if (x < lo(a, i)) x = 2 * lo(a, i) - x;
            if (x > hi(a, i)) x = 2 * hi(a, i) - x;
        }
    };
    auto raw = [](const RobotArmModel& a, const JointVector& q) {
        const RobotKeypoints k = fk(a, q);
        RawArm r;
        r.s = k.s;
        r.e = k.e;
        r.w = k.w;
        r.hand = k.T;
        return r;
    };

    KeypointTrajectory traj;
    traj.frame = TrajectoryFrame::body;
    JointVector ql = start(m.left);
    JointVector qr = start(m.right);
    for (std::size_t f = 0; f < frames; ++f) {
        TrajectoryRecord rec;
        rec.raw.t = static_cast<double>(f) / rate;
        rec.raw.left = raw(m.left, ql);
        rec.raw.right = raw(m.right, qr);
        rec.raw.torso = Vec3{0.0, 0.0, -0.5};
        traj.records.push_back(rec);
        advance(m.left, ql);
        advance(m.right, qr);
    }
    return traj;
}

/// Generic arm observation near the model's shoulder: random limb
/// directions, lengths within ±25% of the robot's, random hand orientation.
/// Usually not exactly reachable.
inline HumanInput random_human_input(const RobotArmModel& m, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.8, 1.25);
    auto unit = [&] {
        for (;;) {
            const Vec3 v{g(rng), g(rng), g(rng)};
            if (norm(v) > 1e-3) return normalize(v);
        }
    };
    HumanInput in;
    in.s = fk(m, JointVector{}).s;
    in.e = in.s + scale(rng) * m.limb_lengths.upper * unit();
    in.w = in.e + scale(rng) * m.limb_lengths.lower * unit();
    in.H = rodrigues(unit(), std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng));
    return in;
}

}  // namespace sewmimic
