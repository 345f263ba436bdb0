#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sewmimic/model_io.hpp"
#include "sewmimic/retarget.hpp"
#include "sewmimic/robot_model.hpp"
#include "sewmimic/safety_filter.hpp"
#include "sewmimic/synth.hpp"

namespace sewmimic::testing {

inline std::string data_path(const std::string& rel) { return std::string(SEWMIMIC_DATA_DIR) + "/" + rel; }

inline RobotArmModel sample_model(WristType wrist, Side side) {
    return load_model(data_path(std::string("models/") + to_string(wrist) + "_" + to_string(side) + ".json"));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        const Vec3 v{n(rng), n(rng), n(rng)};
        if (norm(v) > 1e-3) return normalize(v);
    }
}

inline double random_angle(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
}

inline Rot3 random_rotation(std::mt19937_64& rng) { return rodrigues(random_unit(rng), random_angle(rng)); }

/// Uniform in-limit pose, shrunk by `margin` rad from every limit. `q6_bound`
/// further restricts |q6|.
inline JointVector random_pose(const RobotArmModel& m, std::mt19937_64& rng, double margin = 0.0,
                               double q6_bound = 10.0) {
    JointVector q;
    for (int i = 1; i <= kNumJoints; ++i) {
        double lo = m.lower(i) + margin;
        double hi = m.upper(i) - margin;
        if (i == 6) {
            lo = std::max(lo, -q6_bound);
            hi = std::min(hi, q6_bound);
        }
        q[static_cast<std::size_t>(i - 1)] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    return q;
}

inline RobotArmModel widen_limits(RobotArmModel m, double bound = 2.0 * std::numbers::pi) {
    for (auto& j : m.joints) {
        j.lower = -bound;
        j.upper = bound;
    }
    return m;
}

inline BimanualModel sample_bimanual(WristType wrist) {
    return {sample_model(wrist, Side::left), sample_model(wrist, Side::right)};
}

/// Joint angles that point the arm at elbow e and wrist w (directions only).
inline JointVector pose_towards(const RobotArmModel& m, const Vec3& e, const Vec3& w) {
    const Vec3 s = fk(m, JointVector{}).s;
    return sew_mimic(m, JointVector{}, HumanInput{s, e, w, forearm_hand(e, w)}).q;
}

}  // namespace sewmimic::testing
