#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sewmimic/trajectory.hpp"
#include "test_support.hpp"

using namespace sewmimic;
using namespace sewmimic::testing;

namespace {

const char* kHeader = R"({"format":"sew-trajectory","format_version":1,"frame":"stream"})";

std::string frame_line(double t) {
    RawFrame f;
    f.t = t;
    f.torso = {0, 0, -0.5};
    f.left = {{0, 0.25, 0}, {0.1, 0.3, -0.25}, {0.35, 0.2, -0.3}, Rot3{}, {}, {}};
    f.right = {{0, -0.25, 0}, {0.1, -0.3, -0.25}, {0.35, -0.2, -0.3}, Rot3{}, {}, {}};
    return frame_json(f).dump();
}

TEST(Trajectory, SampleFileLoads) {
    const KeypointTrajectory traj = load_trajectory(data_path("trajectories/sample_rolling_punch.jsonl"));
    ASSERT_EQ(traj.size(), 20u);
    EXPECT_EQ(traj.frame, TrajectoryFrame::stream);
    EXPECT_DOUBLE_EQ(traj.records.front().raw.t, 100.0);
    for (const auto& r : traj.records) EXPECT_FALSE(r.degenerate) << r.issue;
    // Frames 7 and 8 carry finger keypoints instead of a hand quaternion.
    EXPECT_FALSE(traj.records[7].raw.right.hand.has_value());
    EXPECT_TRUE(traj.records[7].raw.right.index.has_value());
    EXPECT_TRUE(traj.records[8].raw.right.pinky.has_value());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const BimanualInput in = body_input(traj, i);
        EXPECT_TRUE(is_rotation(in.right.H));
    }
}

TEST(Trajectory, NonMonotoneTimeReportsLine) {
    std::istringstream in(std::string(kHeader) + "\n" + frame_line(0.0) + "\n" + frame_line(0.0) + "\n");
    try {
        read_trajectory(in);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Trajectory, CommentsAndBlankLinesSkipped) {
    std::istringstream in("# note\n\n" + std::string(kHeader) + "\n" + frame_line(0.0) + "\n  \n" + frame_line(0.1));
    EXPECT_EQ(read_trajectory(in).size(), 2u);
}

TEST(Trajectory, MissingTorsoInStreamFrame) {
    std::istringstream in(R"({"t":0,"left":{},"right":{}})");
    EXPECT_THROW(read_trajectory(in), ParseError);
}

TEST(Trajectory, NonUnitQuaternionRejected) {
    auto j = nlohmann::json::parse(frame_line(0.0));
    j["left"]["hand_quat"] = {0.0, 0.0, 0.0, 2.0};
    std::istringstream in(j.dump());
    EXPECT_THROW(read_trajectory(in), ParseError);
}

TEST(Trajectory, CollinearTorsoMarkedDegenerate) {
    auto j = nlohmann::json::parse(frame_line(0.0));
    j["torso"] = {0.0, 1.0, 0.0};
    std::istringstream in(j.dump());
    const KeypointTrajectory traj = read_trajectory(in);
    ASSERT_EQ(traj.size(), 1u);
    EXPECT_TRUE(traj.records[0].degenerate);
}

TEST(Trajectory, WriteReadRoundTrip) {
    const KeypointTrajectory a = load_trajectory(data_path("trajectories/sample_rolling_punch.jsonl"));
    std::stringstream buf;
    write_trajectory(buf, a);
    const KeypointTrajectory b = read_trajectory(buf);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const BimanualInput x = body_input(a, i), y = body_input(b, i);
        EXPECT_LT(norm(x.left.w - y.left.w), 1e-12);
        EXPECT_LT(frobenius_distance(x.right.H, y.right.H), 1e-12);
    }
}

TEST(Quaternion, RoundTrip) {
    std::mt19937_64 rng(61);
    for (int n = 0; n < 200; ++n) {
        const Rot3 r = random_rotation(rng);
        const auto q = wire::quaternion_from_rotation(r);
        EXPECT_GE(q[3], 0.0);
        EXPECT_LT(frobenius_distance(wire::rotation_from_quaternion(q[0], q[1], q[2], q[3]), r), 1e-12);
    }
}

TEST(Quaternion, ComponentOrderIsXyzw) {
    const auto q = wire::quaternion_from_rotation(rodrigues(Vec3::unit_z(), std::numbers::pi / 2));
    EXPECT_NEAR(q[2], std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(q[3], std::sqrt(0.5), 1e-15);
}

}  // namespace
