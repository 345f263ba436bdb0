#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sewmimic/geometry.hpp"
#include "sewmimic/subproblems.hpp"

namespace sewmimic {

inline constexpr int kNumJoints = 7;

enum class WristType { parallel, perpendicular };
enum class Side { left, right };

inline const char* to_string(WristType w) { return w == WristType::parallel ? "parallel" : "perpendicular"; }
inline const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

/// Joint angles of one 7-DoF arm, radians. Index 0 is joint 1.
struct JointVector {
    std::array<double, kNumJoints> q{};

    double operator[](std::size_t i) const { return q[i]; }
    double& operator[](std::size_t i) { return q[i]; }
    auto begin() const { return q.begin(); }
    auto end() const { return q.end(); }
    auto begin() { return q.begin(); }
    auto end() { return q.end(); }
    static constexpr std::size_t size() { return kNumJoints; }

    friend bool operator==(const JointVector&, const JointVector&) = default;
};

struct Joint {
    /// Rotation axis in the joint's own frame (unit).
    Vec3 axis;
    /// Fixed rotation from the predecessor frame.
    Rot3 local_rotation;
    /// Joint origin in the predecessor frame, meters.
    Vec3 local_translation;
    double lower = -std::numbers::pi;
    double upper = std::numbers::pi;
};

struct CapsuleRadii {
    double torso = 0.15;
    double upper = 0.06;
    double lower = 0.065;
    double hand = 0.07;
};

struct Segment {
    Vec3 p1;
    Vec3 p2;
};

/// Optional static collision volume (e.g. a shoulder housing).
struct StaticCapsule {
    std::string name;
    Vec3 p1;
    Vec3 p2;
    double radius = 0.0;
};

/// 1-based joint indices whose origins are reported as shoulder/elbow/wrist.
struct KeypointJoints {
    int shoulder = 1;
    int elbow = 4;
    int wrist = 6;
};

struct LimbLengths {
    double upper = 0.0;  // ‖e − s‖
    double lower = 0.0;  // ‖w − e‖
    double hand = 0.0;   // ‖t − w‖
};

/// Kinematic description of one 7-DoF arm. All positions are expressed in
/// the body-centric 0th frame.
struct RobotArmModel {
    std::string name;
    Side side = Side::right;
    WristType wrist_type = WristType::parallel;
    std::array<Joint, kNumJoints> joints{};
    /// Tool mount in the 7th frame.
    Rot3 tool_rotation;
    Vec3 tool_translation;
    /// End-effector convention fix: T(q) = R^{0,7}(q) · tool_rotation · r_align.
    Rot3 r_align;
    KeypointJoints keypoint_joints;
    CapsuleRadii radii;
    /// Fixed torso capsule axis.
    Segment torso{{0.0, 0.0, -0.05}, {0.0, 0.0, -0.45}};
    std::vector<StaticCapsule> extra_capsules;
    /// Filled by validate_model().
    LimbLengths limb_lengths;

    const Joint& joint(int one_based) const { return joints[static_cast<std::size_t>(one_based - 1)]; }
    double lower(int one_based) const { return joint(one_based).lower; }
    double upper(int one_based) const { return joint(one_based).upper; }
};

/// Cumulative frames of a chain evaluation: rotation[i] = R^{0,i},
/// origin[i] = position of joint i (origin[0] = 0).
struct ChainPose {
    std::array<Rot3, kNumJoints + 1> rotation{};
    std::array<Vec3, kNumJoints + 1> origin{};
};

inline ChainPose evaluate_chain(const RobotArmModel& model, const JointVector& q) {
    ChainPose pose;
    for (int i = 1; i <= kNumJoints; ++i) {
        const Joint& j = model.joint(i);
        pose.origin[i] = pose.origin[i - 1] + pose.rotation[i - 1] * j.local_translation;
        pose.rotation[i] = pose.rotation[i - 1] * j.local_rotation * rodrigues(j.axis, q[static_cast<std::size_t>(i - 1)]);
    }
    return pose;
}

/// R^{0,i}(q) for 0 ≤ i ≤ 7.
inline Rot3 rotation_to_frame(const RobotArmModel& model, const JointVector& q, int i) {
    if (i < 0 || i > kNumJoints) throw std::out_of_range("rotation_to_frame: joint index out of range");
    Rot3 r;
    for (int k = 1; k <= i; ++k) {
        const Joint& j = model.joint(k);
        r = r * j.local_rotation * rodrigues(j.axis, q[static_cast<std::size_t>(k - 1)]);
    }
    return r;
}

/// Joint axis i expressed in the 0th frame.
inline Vec3 world_axis(const RobotArmModel& model, const ChainPose& pose, int i) {
    return pose.rotation[i] * model.joint(i).axis;
}

struct RobotKeypoints {
    Vec3 s;  // shoulder
    Vec3 e;  // elbow
    Vec3 w;  // wrist
    Vec3 t;  // tool tip
    Rot3 T;  // end-effector orientation
};

inline RobotKeypoints keypoints_from_chain(const RobotArmModel& model, const ChainPose& pose) {
    const auto& kp = model.keypoint_joints;
    RobotKeypoints out;
    out.s = pose.origin[kp.shoulder];
    out.e = pose.origin[kp.elbow];
    out.w = pose.origin[kp.wrist];
    out.t = pose.origin[kNumJoints] + pose.rotation[kNumJoints] * model.tool_translation;
    out.T = pose.rotation[kNumJoints] * model.tool_rotation * model.r_align;
    return out;
}

inline RobotKeypoints fk(const RobotArmModel& model, const JointVector& q) {
    return keypoints_from_chain(model, evaluate_chain(model, q));
}

/// Tool orientation T(q).
inline Rot3 tool_orientation(const RobotArmModel& model, const JointVector& q) {
    return rotation_to_frame(model, q, kNumJoints) * model.tool_rotation * model.r_align;
}

inline double limit_violation(double a, double lo, double hi) {
    if (a < lo) return lo - a;
    if (a > hi) return a - hi;
    return 0.0;
}

/// Moves `a` by ±2π into [lo, hi] when that alias is inside the limits.
inline double limit_alias(double a, double lo, double hi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (a >= lo && a <= hi) return a;
    for (double cand : {a + two_pi, a - two_pi, a + 2 * two_pi, a - 2 * two_pi}) {
        if (cand >= lo && cand <= hi) return cand;
    }
    return a;
}

/// Clamp one joint angle (1-based index) to its limits.
inline double clamp_joint(const RobotArmModel& model, int joint, double a, bool* clamped = nullptr) {
    const double lo = model.lower(joint);
    const double hi = model.upper(joint);
    a = limit_alias(a, lo, hi);
    const double c = std::min(std::max(a, lo), hi);
    if (clamped) *clamped = (c != a);
    return c;
}

/// Keep candidates that satisfy the limits of `joints` (1-based). If none
/// does, the candidate with the smallest total violation is clamped and the
/// set is flagged clamped. A single candidate is therefore simply clamped.
template <std::size_t K, std::size_t N>
SolutionSet<std::array<double, K>, N> bound_joints(const RobotArmModel& model,
                                                   const SolutionSet<std::array<double, K>, N>& candidates,
                                                   const std::array<int, K>& joints) {
    SolutionSet<std::array<double, K>, N> out;
    out.exact = candidates.exact;
    out.degenerate = candidates.degenerate;
    if (candidates.empty()) return out;

    std::size_t best = 0;
    double best_violation = std::numeric_limits<double>::infinity();
    std::array<std::array<double, K>, N> aliased{};
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double violation = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double lo = model.lower(joints[k]);
            const double hi = model.upper(joints[k]);
            aliased[c][k] = limit_alias(candidates[c][k], lo, hi);
            violation += limit_violation(aliased[c][k], lo, hi);
        }
        if (violation == 0.0) out.push(aliased[c]);
        if (violation < best_violation) {
            best_violation = violation;
            best = c;
        }
    }
    if (out.empty()) {
        std::array<double, K> clamped = aliased[best];
        for (std::size_t k = 0; k < K; ++k) {
            clamped[k] = std::min(std::max(clamped[k], model.lower(joints[k])), model.upper(joints[k]));
        }
        out.push(clamped);
        out.clamped = true;
    }
    return out;
}

inline bool within_limits(const RobotArmModel& model, const JointVector& q, double tol = 0.0) {
    for (int i = 1; i <= kNumJoints; ++i) {
        const double a = q[static_cast<std::size_t>(i - 1)];
        if (a < model.lower(i) - tol || a > model.upper(i) + tol) return false;
    }
    return true;
}

/// q clamped joint-wise into the limits.
inline JointVector clamp_to_limits(const RobotArmModel& model, JointVector q) {
    for (int i = 1; i <= kNumJoints; ++i) {
        auto& a = q[static_cast<std::size_t>(i - 1)];
        a = std::min(std::max(a, model.lower(i)), model.upper(i));
    }
    return q;
}

/// Checks structural invariants and fills limb_lengths. Throws
/// InvariantError naming the offending joint.
inline void validate_model(RobotArmModel& model) {
    for (int i = 1; i <= kNumJoints; ++i) {
        const Joint& j = model.joint(i);
        const std::string where = "joint " + std::to_string(i);
        if (std::abs(norm(j.axis) - 1.0) > 1e-9) throw InvariantError(where + ": axis is not a unit vector");
        if (!is_rotation(j.local_rotation)) throw InvariantError(where + ": local rotation is not a rotation matrix");
        if (!(j.lower < j.upper)) throw InvariantError(where + ": lower limit must be below upper limit");
    }
    for (int i = 1; i < kNumJoints; ++i) {
        const Vec3 next = model.joint(i + 1).local_rotation * model.joint(i + 1).axis;
        if (std::abs(dot(model.joint(i).axis, next)) >= 1e-6) {
            throw InvariantError("joint " + std::to_string(i) + " and joint " + std::to_string(i + 1) +
                                 ": consecutive axes are not perpendicular");
        }
    }
    if (!is_rotation(model.tool_rotation)) throw InvariantError("tool rotation is not a rotation matrix");
    if (!is_rotation(model.r_align)) throw InvariantError("r_align is not a rotation matrix");
    const auto& kp = model.keypoint_joints;
    for (int idx : {kp.shoulder, kp.elbow, kp.wrist}) {
        if (idx < 0 || idx > kNumJoints) throw InvariantError("keypoint joint index out of range");
    }
    const auto& r = model.radii;
    if (!(r.torso > 0 && r.upper > 0 && r.lower > 0 && r.hand > 0)) {
        throw InvariantError("capsule radii must be positive");
    }
    for (const auto& c : model.extra_capsules) {
        if (!(c.radius > 0)) throw InvariantError("extra capsule '" + c.name + "': radius must be positive");
    }
    const RobotKeypoints zero = fk(model, JointVector{});
    model.limb_lengths = {norm(zero.e - zero.s), norm(zero.w - zero.e), norm(zero.t - zero.w)};
}

}  // namespace sewmimic
