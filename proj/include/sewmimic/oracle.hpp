#pragma once

// Numerical multi-start minimizer of the retargeting objective. Used only
// as an independent check on the closed-form solver.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

#include "sewmimic/retarget.hpp"

namespace sewmimic {

struct OracleOptions {
    int starts = 50;
    int max_evaluations = 4000;  // per start
    double initial_step = 0.4;   // rad
    double f_tolerance = 1e-16;
    std::uint64_t seed = 1;
};

struct OracleResult {
    JointVector q;
    double cost = std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

namespace detail {

/// Nelder–Mead over the 7 joint angles, with points clamped into the limits.
inline OracleResult nelder_mead(const RobotArmModel& m, const HumanInput& in, JointVector x0, const OracleOptions& opt) {
    constexpr std::size_t n = kNumJoints;
    using Point = JointVector;
    auto f = [&](Point& p, int& evals) {
        p = clamp_to_limits(m, p);
        ++evals;
        return problem_costs(m, p, in).total();
    };
    OracleResult out;
    std::array<Point, n + 1> pts{};
    std::array<double, n + 1> val{};
    pts[0] = x0;
    val[0] = f(pts[0], out.evaluations);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i + 1] = x0;
        const double span = m.upper(static_cast<int>(i + 1)) - m.lower(static_cast<int>(i + 1));
        const double step = std::min(opt.initial_step, 0.25 * span);
        pts[i + 1][i] += pts[i + 1][i] + step > m.upper(static_cast<int>(i + 1)) ? -step : step;
        val[i + 1] = f(pts[i + 1], out.evaluations);
    }

    std::array<std::size_t, n + 1> order{};
    while (out.evaluations < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[n];
        const std::size_t second = order[n - 1];
        if (val[worst] - val[best] <= opt.f_tolerance) break;

        Point centroid;
        for (std::size_t k = 0; k < n; ++k) {
            const Point& p = pts[order[k]];
            for (std::size_t i = 0; i < n; ++i) centroid[i] += p[i] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            Point p;
            for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (pts[worst][i] - centroid[i]);
            return p;
        };
        Point xr = along(-1.0);
        const double fr = f(xr, out.evaluations);
        if (fr < val[best]) {
            Point xe = along(-2.0);
            const double fe = f(xe, out.evaluations);
            if (fe < fr) {
                pts[worst] = xe;
                val[worst] = fe;
            } else {
                pts[worst] = xr;
                val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = xr;
            val[worst] = fr;
        } else {
            Point xc = fr < val[worst] ? along(-0.5) : along(0.5);
            const double fc = f(xc, out.evaluations);
            if (fc < std::min(fr, val[worst])) {
                pts[worst] = xc;
                val[worst] = fc;
            } else {
                for (std::size_t k = 1; k <= n; ++k) {
                    Point& p = pts[order[k]];
                    for (std::size_t i = 0; i < n; ++i) p[i] = pts[best][i] + 0.5 * (p[i] - pts[best][i]);
                    val[order[k]] = f(p, out.evaluations);
                }
            }
        }
    }
    const auto it = std::min_element(val.begin(), val.end());
    out.cost = *it;
    out.q = pts[static_cast<std::size_t>(it - val.begin())];
    return out;
}

}  // namespace detail

/// Best of `starts` local searches. The first start is `warm` when given;
/// the rest are uniform over the joint limits.
inline OracleResult oracle_solve(const RobotArmModel& m, const HumanInput& in, const OracleOptions& opt = {},
                                 const JointVector* warm = nullptr) {
    std::mt19937_64 rng(opt.seed);
    OracleResult best;
    for (int s = 0; s < opt.starts; ++s) {
        JointVector x0;
        if (s == 0 && warm) {
            x0 = *warm;
        } else {
            for (int i = 1; i <= kNumJoints; ++i) {
                x0[static_cast<std::size_t>(i - 1)] = std::uniform_real_distribution<double>(m.lower(i), m.upper(i))(rng);
            }
        }
        const OracleResult r = detail::nelder_mead(m, in, x0, opt);
        best.evaluations += r.evaluations;
        if (r.cost < best.cost) {
            best.cost = r.cost;
            best.q = r.q;
        }
    }
    return best;
}

}  // namespace sewmimic
