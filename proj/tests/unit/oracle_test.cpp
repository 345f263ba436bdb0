#include <gtest/gtest.h>

#include <random>

#include "sewmimic/oracle.hpp"
#include "test_support.hpp"

using namespace sewmimic;
using namespace sewmimic::testing;

namespace {

TEST(Oracle, WarmStartAtTargetStaysThere) {
    const RobotArmModel m = sample_model(WristType::perpendicular, Side::right);
    std::mt19937_64 rng(71);
    const JointVector q = random_pose(m, rng, 0.1, 1.2);
    OracleOptions opt;
    opt.starts = 1;
    const OracleResult r = oracle_solve(m, human_input_from_pose(m, q), opt, &q);
    EXPECT_LT(r.cost, 1e-9);
}

TEST(Oracle, NeverBeatsClosedFormOnReachableInput) {
    const RobotArmModel m = sample_model(WristType::parallel, Side::left);
    std::mt19937_64 rng(72);
    OracleOptions opt;
    opt.starts = 5;
    for (int n = 0; n < 3; ++n) {
        const JointVector q = random_pose(m, rng, 0.1);
        const HumanInput in = human_input_from_pose(m, q);
        const double sew = sew_mimic(m, q, in).costs.total();
        EXPECT_GE(oracle_solve(m, in, opt).cost, sew - 1e-12);
    }
}

TEST(Oracle, StaysWithinLimits) {
    const RobotArmModel m = sample_model(WristType::perpendicular, Side::left);
    std::mt19937_64 rng(73);
    OracleOptions opt;
    opt.starts = 3;
    const OracleResult r = oracle_solve(m, random_human_input(m, rng), opt);
    EXPECT_TRUE(within_limits(m, r.q, 1e-12));
}

}  // namespace
