#pragma once

#include <algorithm>
#include <cmath>

#include "sewmimic/geometry.hpp"

namespace sewmimic {

/// Cosine-similarity orientation error ½ − ½·cos∠(u, v), in [0, 1].
inline double metric_c(const Vec3& u, const Vec3& v) {
    const double nu = norm(u);
    const double nv = norm(v);
    if (!(nu >= kDegenerateEps) || !(nv >= kDegenerateEps)) {
        throw DegenerateError("metric_c: zero vector");
    }
    const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
    return 0.5 - 0.5 * c;
}

/// Principal square root of a rotation: same axis, half the angle.
inline Rot3 rotation_sqrt(const Rot3& r) {
    const AxisAngle aa = axis_angle(r);
    return rodrigues(aa.axis, 0.5 * aa.angle);
}

/// Chordal error ½‖(R1ᵀR2)^{1/2} − I‖_F, in [0, 1].
inline double metric_m(const Rot3& r1, const Rot3& r2) {
    const Rot3 half = rotation_sqrt(r1.transpose() * r2);
    return std::min(1.0, 0.5 * frobenius_distance(half, Rot3::identity()));
}

}  // namespace sewmimic
