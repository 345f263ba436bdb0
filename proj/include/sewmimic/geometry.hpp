#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sewmimic/error.hpp"

namespace sewmimic {

/// Norm below which a vector is treated as zero when it has to be
/// normalized or used as a rotation axis.
inline constexpr double kDegenerateEps = 1e-9;

/// Tolerance used for orthonormality / unit-length checks.
inline constexpr double kRotationTol = 1e-9;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    static constexpr Vec3 unit_x() { return {1.0, 0.0, 0.0}; }
    static constexpr Vec3 unit_y() { return {0.0, 1.0, 0.0}; }
    static constexpr Vec3 unit_z() { return {0.0, 0.0, 1.0}; }

    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double squared_norm(const Vec3& a) { return dot(a, a); }

inline bool is_finite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Unit vector along `v`; throws DegenerateError when ‖v‖ < kDegenerateEps.
inline Vec3 normalize(const Vec3& v) {
    const double n = norm(v);
    if (!(n >= kDegenerateEps)) {
        throw DegenerateError("cannot normalize a vector with norm below 1e-9");
    }
    return v / n;
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << '[' << v.x << ", " << v.y << ", " << v.z << ']';
}

/// 3x3 rotation matrix, row-major storage.
class Rot3 {
public:
    constexpr Rot3() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

    static constexpr Rot3 identity() { return Rot3(); }

    static constexpr Rot3 from_rows(const std::array<double, 9>& rows) {
        Rot3 r;
        r.m_ = rows;
        return r;
    }

    static constexpr Rot3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        return from_rows({c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z});
    }

    constexpr double operator()(int r, int c) const { return m_[3 * r + c]; }
    constexpr double& operator()(int r, int c) { return m_[3 * r + c]; }

    constexpr Vec3 col(int c) const { return {m_[c], m_[3 + c], m_[6 + c]}; }
    constexpr Vec3 row(int r) const { return {m_[3 * r], m_[3 * r + 1], m_[3 * r + 2]}; }

    constexpr const std::array<double, 9>& data() const { return m_; }

    constexpr Rot3 transpose() const {
        return from_rows({m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]});
    }

    constexpr double trace() const { return m_[0] + m_[4] + m_[8]; }

    constexpr double determinant() const {
        return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) - m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
               m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
    }

    friend constexpr Vec3 operator*(const Rot3& r, const Vec3& v) {
        const auto& m = r.m_;
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    friend constexpr Rot3 operator*(const Rot3& a, const Rot3& b) {
        Rot3 out;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                out.m_[3 * i + j] = a.m_[3 * i] * b.m_[j] + a.m_[3 * i + 1] * b.m_[3 + j] +
                                    a.m_[3 * i + 2] * b.m_[6 + j];
            }
        }
        return out;
    }

    /// Rᵀ v without forming the transpose.
    constexpr Vec3 transpose_mul(const Vec3& v) const {
        return {m_[0] * v.x + m_[3] * v.y + m_[6] * v.z, m_[1] * v.x + m_[4] * v.y + m_[7] * v.z,
                m_[2] * v.x + m_[5] * v.y + m_[8] * v.z};
    }

    friend constexpr bool operator==(const Rot3&, const Rot3&) = default;

private:
    std::array<double, 9> m_;
};

inline std::ostream& operator<<(std::ostream& os, const Rot3& r) {
    return os << '[' << r.row(0) << ", " << r.row(1) << ", " << r.row(2) << ']';
}

/// Frobenius norm of a - b.
inline double frobenius_distance(const Rot3& a, const Rot3& b) {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// ‖RᵀR − I‖_F
inline double orthonormality_error(const Rot3& r) {
    return frobenius_distance(r.transpose() * r, Rot3::identity());
}

inline bool is_rotation(const Rot3& r, double tol = kRotationTol) {
    return orthonormality_error(r) < tol && std::abs(r.determinant() - 1.0) < tol;
}

/// Skew-symmetric cross-product matrix: hat(h) v = h × v.
constexpr Rot3 hat(const Vec3& h) {
    return Rot3::from_rows({0.0, -h.z, h.y, h.z, 0.0, -h.x, -h.y, h.x, 0.0});
}

/// Rodrigues rotation about unit axis `h` by `angle` radians.
/// Throws DegenerateError if ‖h‖ differs from 1 by more than 1e-9.
inline Rot3 rodrigues(const Vec3& h, double angle) {
    if (!(std::abs(norm(h) - 1.0) <= kRotationTol)) {
        throw DegenerateError("rotation axis must be a unit vector");
    }
    const double s = std::sin(angle);
    const double c1 = 1.0 - std::cos(angle);
    // I + s·hat(h) + (1 − cos)·hat(h)², with hat(h)² = h hᵀ − I for unit h.
    const double xx = h.x * h.x, yy = h.y * h.y, zz = h.z * h.z;
    const double xy = h.x * h.y, xz = h.x * h.z, yz = h.y * h.z;
    return Rot3::from_rows({1.0 + c1 * (xx - 1.0), -s * h.z + c1 * xy, s * h.y + c1 * xz,
                            s * h.z + c1 * xy, 1.0 + c1 * (yy - 1.0), -s * h.x + c1 * yz,
                            -s * h.y + c1 * xz, s * h.x + c1 * yz, 1.0 + c1 * (zz - 1.0)});
}

/// R(h, angle) v computed directly, without building the matrix.
inline Vec3 rotate(const Vec3& h, double angle, const Vec3& v) {
    const double s = std::sin(angle);
    const double c = std::cos(angle);
    return v * c + cross(h, v) * s + h * (dot(h, v) * (1.0 - c));
}

/// Rotation angle in [0, π], robust near 0 and π.
inline double rotation_angle(const Rot3& r) {
    const Vec3 w{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
    const double s = 0.5 * norm(w);
    const double c = 0.5 * (r.trace() - 1.0);
    return std::atan2(s, c);
}

struct AxisAngle {
    Vec3 axis;
    double angle = 0.0;
};

/// Axis-angle decomposition with angle in [0, π]. At angle 0 the axis is
/// +x; at angle π one valid axis is returned (sign is arbitrary there).
inline AxisAngle axis_angle(const Rot3& r) {
    const double angle = rotation_angle(r);
    const Vec3 w{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
    const double wn = norm(w);
    if (angle < 1e-12) {
        return {Vec3::unit_x(), 0.0};
    }
    if (std::numbers::pi - angle > 1e-6 && wn > 1e-12) {
        return {w / wn, angle};
    }
    // Near π the skew part vanishes; use sym(R) − cos·I = (1 − cos) a aᵀ,
    // reading the column with the largest diagonal entry.
    const double c = std::cos(angle);
    int k = 0;
    if (r(1, 1) > r(k, k)) k = 1;
    if (r(2, 2) > r(k, k)) k = 2;
    Vec3 a;
    for (int i = 0; i < 3; ++i) {
        a[i] = 0.5 * (r(i, k) + r(k, i)) - (i == k ? c : 0.0);
    }
    a = a / norm(a);
    // Keep the sign consistent with the (small) skew part when it exists.
    if (dot(a, w) < 0.0) a = -a;
    return {a, angle};
}

/// Nearest rotation obtained by Gram-Schmidt on the first two columns.
inline Rot3 orthonormalize(const Rot3& r) {
    const Vec3 x = normalize(r.col(0));
    const Vec3 z = normalize(cross(x, r.col(1)));
    const Vec3 y = cross(z, x);
    return Rot3::from_columns(x, y, z);
}

/// Coordinate frame: orientation and origin, both relative to the 0th frame.
struct Frame {
    Rot3 orientation;
    Vec3 origin;

    static Frame identity() { return {}; }
};

/// Express a point given in frame `a` in frame `b`:
/// v_b = C_bᵀ (C_a v_a + c_a − c_b).
inline Vec3 transform_point(const Vec3& v_a, const Frame& a, const Frame& b) {
    return b.orientation.transpose_mul(a.orientation * v_a + a.origin - b.origin);
}

/// Express a direction given in frame `a` in frame `b` (no translation).
inline Vec3 transform_direction(const Vec3& v_a, const Frame& a, const Frame& b) {
    return b.orientation.transpose_mul(a.orientation * v_a);
}

/// Frame from a left, right and bottom keypoint. Origin is the midpoint of
/// left/right; y points right→left, x is y × (origin − bottom), z = x × y.
inline Frame make_frame(const Vec3& k_left, const Vec3& k_right, const Vec3& k_bottom) {
    const Vec3 origin = 0.5 * (k_left + k_right);
    const Vec3 lr = k_left - k_right;
    const Vec3 up = origin - k_bottom;
    if (norm(cross(lr, k_bottom - k_right)) * 0.5 <= kDegenerateEps || norm(lr) < kDegenerateEps) {
        throw DegenerateError("make_frame: keypoints are collinear");
    }
    const Vec3 uy = normalize(lr);
    const Vec3 ux = normalize(cross(uy, up));
    const Vec3 uz = cross(ux, uy);
    return {Rot3::from_columns(ux, uy, uz), origin};
}

/// Wrap an angle to (−π, π].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

}  // namespace sewmimic
