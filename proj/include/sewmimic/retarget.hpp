#pragma once

// Shoulder-elbow-wrist retargeting: aligns the robot's 3rd joint axis with
// the human upper arm, the 5th with the lower arm, and the tool frame with
// the hand, each stage solved in closed form.

#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "sewmimic/geometry.hpp"
#include "sewmimic/metrics.hpp"
#include "sewmimic/robot_model.hpp"
#include "sewmimic/subproblems.hpp"

namespace sewmimic {

/// One human arm in the body-centric frame.
struct HumanInput {
    Vec3 s;  // shoulder
    Vec3 e;  // elbow
    Vec3 w;  // wrist
    Rot3 H;  // hand orientation: x index / y palm normal / z thumb
};

/// Squared error terms of the retargeting objective.
struct ProblemCosts {
    double upper = 0.0;
    double lower = 0.0;
    double wrist = 0.0;

    double total() const { return upper + lower + wrist; }

    friend bool operator==(const ProblemCosts&, const ProblemCosts&) = default;
};

struct RetargetFlags {
    bool clamped_shoulder = false;  // q1, q2
    bool clamped_elbow = false;     // q3, q4
    bool clamped_wrist = false;     // q5..q7
    bool degenerate_upper = false;
    bool degenerate_lower = false;
    bool degenerate_wrist = false;
    bool gimbal = false;

    bool any_clamped() const { return clamped_shoulder || clamped_elbow || clamped_wrist; }
    bool any_degenerate() const { return degenerate_upper || degenerate_lower || degenerate_wrist || gimbal; }
    bool any() const { return any_clamped() || any_degenerate(); }
};

struct RetargetResult {
    JointVector q;
    ProblemCosts costs;
    RetargetFlags flags;
    /// Wall-clock time of the solve, seconds.
    double solve_seconds = 0.0;
};

struct AxisAlignment {
    double first = 0.0;   // q_{i-2}
    double second = 0.0;  // q_{i-1}
    bool clamped = false;
    bool degenerate = false;
};

/// Joint angles (q_{i-2}, q_{i-1}) that point joint axis i along `v`,
/// choosing among the in-limit solutions the one closest to q0.
/// i must be 3, 5 or 7; joints before i-2 are taken from q0.
inline AxisAlignment align_axis(const RobotArmModel& model, int i, const JointVector& q0, const Vec3& v) {
    if (i < 3 || i > kNumJoints) throw std::out_of_range("align_axis: joint index must be in 3..7");
    const auto ia = static_cast<std::size_t>(i - 3);  // 0-based index of q_{i-2}
    const auto ib = static_cast<std::size_t>(i - 2);  // 0-based index of q_{i-1}

    // Frame i-2 before its own joint rotation.
    const Rot3 pre = rotation_to_frame(model, q0, i - 3) * model.joint(i - 2).local_rotation;
    const Vec3 target = pre.transpose_mul(v);

    const Rot3& to_prev = model.joint(i - 1).local_rotation;
    const Vec3 k1 = -model.joint(i - 2).axis;
    const Vec3 k2 = to_prev * model.joint(i - 1).axis;
    const Vec3 axis_i = to_prev * (model.joint(i).local_rotation * model.joint(i).axis);

    AxisAlignment out;
    AnglePairSet solutions = sp2(target, axis_i, k1, k2);
    if (solutions.degenerate) {
        out.degenerate = true;
        // Target on the q_{i-2} axis: that angle is free, keep the current one.
        if (norm(cross(normalize(target), k1)) < kDegenerateEps) {
            for (std::size_t c = 0; c < solutions.size(); ++c) solutions[c][0] = q0[ia];
        }
    }

    const AnglePairSet bounded = bound_joints(model, solutions, std::array<int, 2>{i - 2, i - 1});
    out.clamped = bounded.clamped;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : bounded) {
        const double dist = std::abs(q0[ia] - c[0]) + std::abs(q0[ib] - c[1]);
        if (dist < best) {
            best = dist;
            out.first = c[0];
            out.second = c[1];
        }
    }
    return out;
}

/// Desired orientation of the 7th joint frame for hand orientation H.
inline Rot3 desired_frame7(const RobotArmModel& model, const Rot3& H) {
    return H * model.r_align.transpose() * model.tool_rotation.transpose();
}

struct WristAlignment {
    std::array<double, 3> q{};  // q5, q6, q7
    bool clamped = false;
    bool degenerate = false;
    bool gimbal = false;
};

/// Parallel wrist: point joint axis 7 with sp2, then roll about it with sp1.
inline WristAlignment align_wrist_parallel(const RobotArmModel& model, const JointVector& q0, const Rot3& H) {
    WristAlignment out;
    const Rot3 des7 = desired_frame7(model, H);
    const Vec3& h6 = model.joint(6).axis;
    const Vec3& h7 = model.joint(7).axis;

    const AxisAlignment a = align_axis(model, 7, q0, des7 * h7);
    JointVector q = q0;
    q[4] = a.first;
    q[5] = a.second;
    out.clamped = a.clamped;
    out.degenerate = a.degenerate;

    const Vec3 h6_world = rotation_to_frame(model, q, 6) * h6;
    const Vec3 h6_in_des7 = des7.transpose_mul(h6_world);
    const Vec3 h6_in_7 = model.joint(7).local_rotation.transpose_mul(h6);
    double q7 = q0[6];
    if (auto t = try_sp1(h6_in_7, h6_in_des7, -h7)) {
        q7 = *t;
    } else {
        out.degenerate = true;
    }
    bool clamped7 = false;
    q7 = clamp_joint(model, 7, q7, &clamped7);
    out.clamped = out.clamped || clamped7;
    out.q = {q[4], q[5], q7};
    return out;
}

/// Which body axis (x/y/z with sign) each of joints 5..7 rotates about,
/// expressed in the 5th frame before its own rotation.
struct EulerOrder {
    std::array<char, 3> letters{'?', '?', '?'};
    std::array<int, 3> signs{1, 1, 1};
    bool repeated = false;  // first and last axis coincide (e.g. X/Y/X)

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < 3; ++i) {
            if (i) s += '/';
            if (signs[i] < 0) s += '-';
            s += letters[i];
        }
        return s;
    }
};

namespace detail {

struct WristAxes {
    Vec3 a5, a6, a7;
};

inline WristAxes wrist_axes(const RobotArmModel& model) {
    const Rot3& r56 = model.joint(6).local_rotation;
    const Rot3& r67 = model.joint(7).local_rotation;
    return {model.joint(5).axis, r56 * model.joint(6).axis, r56 * (r67 * model.joint(7).axis)};
}

}  // namespace detail

inline EulerOrder wrist_euler_order(const RobotArmModel& model) {
    const auto axes = detail::wrist_axes(model);
    EulerOrder order;
    const std::array<Vec3, 3> a{axes.a5, axes.a6, axes.a7};
    for (std::size_t i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            if (std::abs(std::abs(a[i][k]) - 1.0) < 1e-6) {
                order.letters[i] = static_cast<char>('X' + k);
                order.signs[i] = a[i][k] > 0 ? 1 : -1;
            }
        }
    }
    order.repeated = std::abs(std::abs(dot(axes.a5, axes.a7)) - 1.0) < 1e-6;
    return order;
}

/// Intrinsic Euler decomposition R = R(a,α)·R(b,β)·R(c,γ) for orthonormal
/// a ⟂ b with c = ±a×b (distinct axes) or c = ±a (repeated axes).
/// Returns up to two (α, β, γ) branches; empty when the middle angle is at
/// a gimbal singularity.
inline SolutionSet<std::array<double, 3>> euler_decompose(const Rot3& r, const Vec3& a, const Vec3& b, const Vec3& c) {
    SolutionSet<std::array<double, 3>> out;
    const Vec3 axb = cross(a, b);
    const Rot3 P = Rot3::from_columns(a, b, axb);
    const Rot3 N = P.transpose() * r * P;
    constexpr double kGimbal = 1e-6;

    const double tb = dot(c, axb);
    if (std::abs(std::abs(tb) - 1.0) < 1e-6) {
        // N = Rx(α) Ry(β) Rz(σγ)
        const double sigma = tb > 0 ? 1.0 : -1.0;
        const double rho = std::hypot(N(0, 0), N(0, 1));
        if (rho < kGimbal) return out;
        for (double sb : {1.0, -1.0}) {
            const double beta = std::atan2(N(0, 2), sb * rho);
            const double alpha = std::atan2(-N(1, 2) * sb, N(2, 2) * sb);
            const double gamma = std::atan2(-N(0, 1) * sb, N(0, 0) * sb);
            out.push({wrap_angle(alpha), wrap_angle(beta), wrap_angle(sigma * gamma)});
        }
        return out;
    }
    const double rep = dot(c, a);
    if (std::abs(std::abs(rep) - 1.0) < 1e-6) {
        // N = Rx(α) Ry(β) Rx(σγ)
        const double sigma = rep > 0 ? 1.0 : -1.0;
        const double rho = std::hypot(N(0, 1), N(0, 2));
        if (rho < kGimbal) return out;
        for (double sb : {1.0, -1.0}) {
            const double beta = std::atan2(sb * rho, N(0, 0));
            const double gamma = std::atan2(N(0, 1) * sb, N(0, 2) * sb);
            const double alpha = std::atan2(N(1, 0) * sb, -N(2, 0) * sb);
            out.push({wrap_angle(alpha), wrap_angle(beta), wrap_angle(sigma * gamma)});
        }
        return out;
    }
    throw InvariantError("euler_decompose: third axis is neither a×b nor a");
}

/// Perpendicular wrist: Euler decomposition of the desired wrist rotation
/// in the axis order of joints 5, 6, 7.
inline WristAlignment align_wrist_perpendicular(const RobotArmModel& model, const JointVector& q0, const Rot3& H) {
    WristAlignment out;
    const Rot3 des7 = desired_frame7(model, H);
    const Rot3 pre5 = rotation_to_frame(model, q0, 4) * model.joint(5).local_rotation;
    const Rot3 fixed = model.joint(6).local_rotation * model.joint(7).local_rotation;
    const Rot3 wrist = pre5.transpose() * des7 * fixed.transpose();
    const auto axes = detail::wrist_axes(model);

    const auto branches = euler_decompose(wrist, axes.a5, axes.a6, axes.a7);
    if (branches.empty()) {
        out.gimbal = true;
        out.q = {q0[4], q0[5], q0[6]};
        return out;
    }
    const auto bounded = bound_joints(model, branches, std::array<int, 3>{5, 6, 7});
    out.clamped = bounded.clamped;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : bounded) {
        const double dist = std::abs(q0[4] - c[0]) + std::abs(q0[5] - c[1]) + std::abs(q0[6] - c[2]);
        if (dist < best) {
            best = dist;
            out.q = c;
        }
    }
    return out;
}

/// Squared error terms for pose q against one human arm.
inline ProblemCosts problem_costs(const RobotArmModel& model, const JointVector& q, const HumanInput& in) {
    const ChainPose pose = evaluate_chain(model, q);
    const RobotKeypoints kp = keypoints_from_chain(model, pose);
    ProblemCosts c;
    const Vec3 u = in.e - in.s;
    const Vec3 l = in.w - in.e;
    if (norm(u) >= kDegenerateEps) {
        const double m = metric_c(u, world_axis(model, pose, 3));
        c.upper = m * m;
    }
    if (norm(l) >= kDegenerateEps) {
        const double m = metric_c(l, world_axis(model, pose, 5));
        c.lower = m * m;
    }
    const double m = metric_m(kp.T, in.H);
    c.wrist = m * m;
    return c;
}

/// Closed-form retargeting of one arm starting from the current pose q0.
/// Degenerate limbs hold the affected joints at q0 and set a flag.
inline RetargetResult sew_mimic(const RobotArmModel& model, const JointVector& q0, const HumanInput& in) {
    RetargetResult out;
    const auto start = std::chrono::steady_clock::now();
    JointVector q = q0;

    const Vec3 u = in.e - in.s;
    const Vec3 l = in.w - in.e;
    if (norm(u) >= kDegenerateEps) {
        const AxisAlignment a = align_axis(model, 3, q, u / norm(u));
        q[0] = a.first;
        q[1] = a.second;
        out.flags.clamped_shoulder = a.clamped;
        out.flags.degenerate_upper = a.degenerate;
    } else {
        out.flags.degenerate_upper = true;
    }
    if (norm(l) >= kDegenerateEps) {
        const AxisAlignment a = align_axis(model, 5, q, l / norm(l));
        q[2] = a.first;
        q[3] = a.second;
        out.flags.clamped_elbow = a.clamped;
        out.flags.degenerate_lower = a.degenerate;
    } else {
        out.flags.degenerate_lower = true;
    }

    const WristAlignment w = model.wrist_type == WristType::parallel ? align_wrist_parallel(model, q, in.H)
                                                                     : align_wrist_perpendicular(model, q, in.H);
    q[4] = w.q[0];
    q[5] = w.q[1];
    q[6] = w.q[2];
    out.flags.clamped_wrist = w.clamped;
    out.flags.degenerate_wrist = w.degenerate;
    out.flags.gimbal = w.gimbal;

    out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.q = q;
    out.costs = problem_costs(model, q, in);
    return out;
}

/// The human input that a robot pose itself represents (used for
/// generate-then-solve round trips).
inline HumanInput human_input_from_pose(const RobotArmModel& model, const JointVector& q) {
    const RobotKeypoints kp = fk(model, q);
    return {kp.s, kp.e, kp.w, kp.T};
}

}  // namespace sewmimic
