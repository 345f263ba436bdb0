#pragma once

// JSON encodings shared by trajectory files, reports and the sandbox
// protocol. Unit quaternions appear only here, ordered (x, y, z, w).

#include <array>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "sewmimic/error.hpp"
#include "sewmimic/geometry.hpp"

namespace sewmimic::wire {

using json = nlohmann::json;

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec3(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ParseError(what + ": expected [x, y, z]");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        const auto& x = j[static_cast<std::size_t>(i)];
        if (!x.is_number()) throw ParseError(what + ": expected numbers");
        v[i] = x.get<double>();
    }
    if (!is_finite(v)) throw ParseError(what + ": non-finite value");
    return v;
}

inline Rot3 rotation_from_quaternion(double x, double y, double z, double w) {
    return Rot3::from_rows({1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
                            2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
                            2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)});
}

/// (x, y, z, w) with w ≥ 0.
inline std::array<double, 4> quaternion_from_rotation(const Rot3& r) {
    std::array<double, 4> q{};
    const double tr = r.trace();
    if (tr > 0.0) {
        const double s = 2.0 * std::sqrt(tr + 1.0);
        q = {(r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s, 0.25 * s};
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
        q = {0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s, (r(2, 1) - r(1, 2)) / s};
    } else if (r(1, 1) > r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
        q = {(r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s, (r(0, 2) - r(2, 0)) / s};
    } else {
        const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
        q = {(r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s, (r(1, 0) - r(0, 1)) / s};
    }
    if (q[3] < 0.0) {
        for (double& c : q) c = -c;
    }
    return q;
}

inline json quaternion_json(const Rot3& r) {
    const auto q = quaternion_from_rotation(r);
    return json::array({q[0], q[1], q[2], q[3]});
}

/// Quaternions within 1e-6 of unit norm are renormalized; others are rejected.
inline Rot3 quaternion(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 4) throw ParseError(what + ": expected [x, y, z, w]");
    std::array<double, 4> q{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number()) throw ParseError(what + ": expected numbers");
        q[i] = j[i].get<double>();
    }
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) throw ParseError(what + ": quaternion is not unit length");
    return rotation_from_quaternion(q[0] / n, q[1] / n, q[2] / n, q[3] / n);
}

inline json matrix_json(const Rot3& r) { return r.data(); }

inline Rot3 matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 9) throw ParseError(what + ": expected 9 numbers (row-major)");
    std::array<double, 9> rows{};
    for (std::size_t i = 0; i < 9; ++i) {
        if (!j[i].is_number()) throw ParseError(what + ": expected numbers");
        rows[i] = j[i].get<double>();
    }
    const Rot3 r = Rot3::from_rows(rows);
    if (orthonormality_error(r) > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
        throw ParseError(what + ": not a rotation matrix");
    }
    return orthonormalize(r);
}

}  // namespace sewmimic::wire
