#pragma once

// Closed-form rotation subproblems (Paden-Kahan family, ik-geo formulation):
//   sp1: rotate p1 about k onto p2
//   sp4: rotate p about k onto the plane hᵀx = d
//   sp2: rotate p1 about k1 and p2 about k2 until they coincide

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

#include "sewmimic/geometry.hpp"

namespace sewmimic {

/// Fixed-capacity set of candidate solutions plus quality flags.
template <typename T, std::size_t N = 4>
struct SolutionSet {
    std::array<T, N> items{};
    std::size_t count = 0;
    /// Constraint satisfied exactly (residual < 1e-9).
    bool exact = true;
    /// Solution is not unique in a continuous sense (rotation cannot change
    /// the objective); returned angles are a placeholder.
    bool degenerate = false;
    /// Set by bound_joints when no candidate was within limits.
    bool clamped = false;

    void push(const T& v) {
        if (count < N) items[count++] = v;
    }
    bool empty() const { return count == 0; }
    std::size_t size() const { return count; }
    const T& operator[](std::size_t i) const { return items[i]; }
    T& operator[](std::size_t i) { return items[i]; }
    const T* begin() const { return items.data(); }
    const T* end() const { return items.data() + count; }
};

using AnglePair = std::array<double, 2>;
using AngleSet = SolutionSet<double>;
using AnglePairSet = SolutionSet<AnglePair>;

inline constexpr double kExactTol = 1e-9;
inline constexpr double kRootMergeTol = 1e-7;

/// Subproblem 1. Returns nullopt when p1 or p2 has no component
/// perpendicular to k.
inline std::optional<double> try_sp1(const Vec3& p1, const Vec3& p2, const Vec3& k) {
    const Vec3 p1_perp = p1 - dot(p1, k) * k;
    const Vec3 p2_perp = p2 - dot(p2, k) * k;
    const double n1 = norm(p1_perp);
    const double n2 = norm(p2_perp);
    if (!(n1 >= kDegenerateEps) || !(n2 >= kDegenerateEps)) return std::nullopt;
    const Vec3 a = p1_perp / n1;
    const Vec3 b = p2_perp / n2;
    double theta = 2.0 * std::atan2(norm(a - b), norm(a + b));
    if (dot(k, cross(a, b)) < 0.0) theta = -theta;
    return wrap_angle(theta);
}

/// Subproblem 1: angle minimizing ‖R(k,θ)p1 − p2‖.
/// Throws DegenerateError if either vector is parallel to k.
inline double sp1(const Vec3& p1, const Vec3& p2, const Vec3& k) {
    if (auto t = try_sp1(p1, p2, k)) return *t;
    throw DegenerateError("sp1: vector is collinear with the rotation axis");
}

/// Subproblem 4: angles minimizing |hᵀR(k,θ)p − d|. Two roots when the
/// circle traced by p crosses the plane, otherwise the single least-squares
/// angle with exact = false.
inline AngleSet sp4(const Vec3& p, const Vec3& h, const Vec3& k, double d) {
    AngleSet out;
    const Vec3 kp = cross(k, p);
    // A = hᵀ [k̂p, −k̂²p], b = d − hᵀk kᵀp
    const double a1 = dot(h, kp);
    const double a2 = -dot(h, cross(k, kp));
    const double b = d - dot(h, k) * dot(k, p);
    const double a_sq = a1 * a1 + a2 * a2;

    if (a_sq < kDegenerateEps * kDegenerateEps) {
        out.degenerate = true;
        out.exact = std::abs(b) < kExactTol;
        out.push(0.0);
        return out;
    }

    const double xs = a1 * b / a_sq;
    const double xc = a2 * b / a_sq;
    auto residual = [&](double theta) {
        return std::abs(a1 * std::sin(theta) + a2 * std::cos(theta) - b);
    };

    if (a_sq > b * b) {
        const double z = std::sqrt(a_sq - b * b);
        const double ns = a2 * z / a_sq;
        const double nc = -a1 * z / a_sq;
        const double t_plus = wrap_angle(std::atan2(xs + ns, xc + nc));
        const double t_minus = wrap_angle(std::atan2(xs - ns, xc - nc));
        if (std::abs(wrap_angle(t_plus - t_minus)) < kRootMergeTol) {
            out.push(wrap_angle(t_plus + 0.5 * wrap_angle(t_minus - t_plus)));
        } else {
            out.push(t_plus);
            out.push(t_minus);
        }
    } else {
        out.push(wrap_angle(std::atan2(xs, xc)));
    }
    out.exact = true;
    for (double t : out) out.exact = out.exact && residual(t) < kExactTol;
    return out;
}

/// ‖R(k1,θ1)p1 − R(k2,θ2)p2‖
inline double sp2_residual(const Vec3& p1, const Vec3& p2, const Vec3& k1, const Vec3& k2,
                           const AnglePair& t) {
    return norm(rotate(k1, t[0], p1) - rotate(k2, t[1], p2));
}

/// Subproblem 2 on the normalized inputs. Each angle comes from one sp4
/// call; candidate pairings are validated by residual so that a 1-root and
/// a 2-root sp4 result combine correctly.
inline AnglePairSet sp2(const Vec3& p1, const Vec3& p2, const Vec3& k1, const Vec3& k2) {
    const Vec3 u = normalize(p1);
    const Vec3 v = normalize(p2);

    // k2ᵀR(k1,θ1)u = k2ᵀv  and  k1ᵀR(k2,θ2)v = k1ᵀu
    const AngleSet first = sp4(u, k2, k1, dot(k2, v));
    const AngleSet second = sp4(v, k1, k2, dot(k1, u));

    std::array<AnglePair, 4> candidates{};
    std::array<double, 4> residuals{};
    std::size_t n = 0;
    for (double a : first) {
        for (double b : second) {
            candidates[n] = {a, b};
            residuals[n] = sp2_residual(u, v, k1, k2, candidates[n]);
            ++n;
        }
    }

    // A degenerate side leaves that angle free; re-solve it against the
    // other side with sp1 so the pair is still optimal.
    if (first.degenerate && !second.degenerate) {
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 target = rotate(k2, candidates[i][1], v);
            if (auto t = try_sp1(u, target, k1)) candidates[i][0] = *t;
            residuals[i] = sp2_residual(u, v, k1, k2, candidates[i]);
        }
    } else if (second.degenerate && !first.degenerate) {
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 target = rotate(k1, candidates[i][0], u);
            if (auto t = try_sp1(v, target, k2)) candidates[i][1] = *t;
            residuals[i] = sp2_residual(u, v, k1, k2, candidates[i]);
        }
    }

    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
              [&](std::size_t a, std::size_t b) { return residuals[a] < residuals[b]; });

    AnglePairSet out;
    out.degenerate = first.degenerate || second.degenerate;
    const double best = residuals[order[0]];
    out.exact = best < kExactTol;
    for (std::size_t i = 0; i < n && out.size() < 2; ++i) {
        const std::size_t idx = order[i];
        if (residuals[idx] > best + 1e-8) break;
        bool duplicate = false;
        for (const auto& kept : out) {
            duplicate = duplicate || (std::abs(wrap_angle(kept[0] - candidates[idx][0])) < kRootMergeTol &&
                                      std::abs(wrap_angle(kept[1] - candidates[idx][1])) < kRootMergeTol);
        }
        if (!duplicate) out.push(candidates[idx]);
    }
    return out;
}

}  // namespace sewmimic
