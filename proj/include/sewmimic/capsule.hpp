#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sewmimic/geometry.hpp"

namespace sewmimic {

enum class CapsuleTag { torso, upper_left, upper_right, lower_left, lower_right, hand_left, hand_right, fixed };

inline const char* to_string(CapsuleTag t) {
    switch (t) {
        case CapsuleTag::torso: return "torso";
        case CapsuleTag::upper_left: return "upper_lt";
        case CapsuleTag::upper_right: return "upper_rt";
        case CapsuleTag::lower_left: return "lower_lt";
        case CapsuleTag::lower_right: return "lower_rt";
        case CapsuleTag::hand_left: return "hand_lt";
        case CapsuleTag::hand_right: return "hand_rt";
        case CapsuleTag::fixed: return "fixed";
    }
    return "?";
}

/// Sphere of radius r swept along the segment p1 → p2.
struct Capsule {
    Vec3 p1;
    Vec3 p2;
    double r = 0.0;
    CapsuleTag tag = CapsuleTag::fixed;
};

struct SegmentClosest {
    Vec3 c1;
    Vec3 c2;
    double s = 0.0;  // c1 = (1 − s)·p1 + s·q1
    double t = 0.0;  // c2 = (1 − t)·p2 + t·q2
    double distance = 0.0;
};

/// Closest points between segments p1q1 and p2q2 (Ericson, Real-Time
/// Collision Detection, 5.1.9). Parallel overlapping segments report the
/// midpoint of the overlap.
inline SegmentClosest closest_points(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
    const Vec3 d1 = q1 - p1;
    const Vec3 d2 = q2 - p2;
    const Vec3 r = p1 - p2;
    const double a = dot(d1, d1);
    const double e = dot(d2, d2);
    const double f = dot(d2, r);
    constexpr double eps2 = kDegenerateEps * kDegenerateEps;
    double s = 0.0;
    double t = 0.0;

    if (a <= eps2 && e <= eps2) {
        // both points
    } else if (a <= eps2) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e <= eps2) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            bool done = false;
            if (denom > 1e-12 * a * e) {
                s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
            } else {
                const double sa = dot(p2 - p1, d1) / a;
                const double sb = dot(q2 - p1, d1) / a;
                const double lo = std::max(0.0, std::min(sa, sb));
                const double hi = std::min(1.0, std::max(sa, sb));
                if (lo <= hi) {
                    s = 0.5 * (lo + hi);
                    t = std::clamp(dot(p1 + s * d1 - p2, d2) / e, 0.0, 1.0);
                    done = true;
                }
            }
            if (!done) {
                t = (b * s + f) / e;
                if (t < 0.0) {
                    t = 0.0;
                    s = std::clamp(-c / a, 0.0, 1.0);
                } else if (t > 1.0) {
                    t = 1.0;
                    s = std::clamp((b - c) / a, 0.0, 1.0);
                }
            }
        }
    }
    SegmentClosest out;
    out.s = s;
    out.t = t;
    out.c1 = p1 + s * d1;
    out.c2 = p2 + t * d2;
    out.distance = norm(out.c2 - out.c1);
    return out;
}

/// Signed distance and τ-scaled contact normals between two capsules.
struct ContactResult {
    double d = 0.0;  // negative when intersecting
    Vec3 c_i;
    Vec3 c_j;
    double tau_i = 0.0;
    double tau_j = 0.0;
    Vec3 n_i;  // τ_i · normalize(c_j − c_i)
    Vec3 n_j;  // τ_j · normalize(c_i − c_j)
};

namespace detail {

inline Vec3 any_perpendicular(const Vec3& v) {
    // Coordinate axis least aligned with v, smallest index on ties.
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(v[i]) < std::abs(v[k])) k = i;
    }
    Vec3 axis;
    axis[k] = 1.0;
    return normalize(cross(v, axis));
}

}  // namespace detail

inline ContactResult collision_check(const Capsule& ci, const Capsule& cj) {
    const SegmentClosest cp = closest_points(ci.p1, ci.p2, cj.p1, cj.p2);
    ContactResult out;
    out.d = cp.distance - ci.r - cj.r;
    out.c_i = cp.c1;
    out.c_j = cp.c2;
    // A point capsule takes the full normal.
    out.tau_i = squared_norm(ci.p2 - ci.p1) > kDegenerateEps * kDegenerateEps ? cp.s : 1.0;
    out.tau_j = squared_norm(cj.p2 - cj.p1) > kDegenerateEps * kDegenerateEps ? cp.t : 1.0;

    Vec3 dir;
    if (cp.distance >= kDegenerateEps) {
        dir = (cp.c2 - cp.c1) / cp.distance;
    } else {
        // Axes touch: separate along the common perpendicular, else center to center.
        const Vec3 n = cross(ci.p2 - ci.p1, cj.p2 - cj.p1);
        const Vec3 centers = 0.5 * (cj.p1 + cj.p2) - 0.5 * (ci.p1 + ci.p2);
        if (norm(n) >= kDegenerateEps) {
            dir = normalize(n);
            if (dot(dir, centers) < 0.0) dir = -dir;
        } else if (norm(centers) >= kDegenerateEps) {
            dir = normalize(centers);
        } else {
            const Vec3 axis = ci.p2 - ci.p1;
            dir = norm(axis) >= kDegenerateEps ? detail::any_perpendicular(axis) : Vec3::unit_x();
        }
    }
    out.n_i = out.tau_i * dir;
    out.n_j = -out.tau_j * dir;
    return out;
}

}  // namespace sewmimic
