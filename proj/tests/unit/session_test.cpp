#include <gtest/gtest.h>

#include <random>

#include "sewmimic/replay.hpp"
#include "sewmimic/sandbox/session.hpp"
#include "test_support.hpp"

using namespace sewmimic;
using namespace sewmimic::testing;
using sandbox::json;

namespace {

json update_for(const RawFrame& f, const char* frame = "stream") {
    json j = frame_json(f);
    j["type"] = "update";
    j["frame"] = frame;
    return j;
}

json arm_for(const HumanInput& h) {
    return {{"s", wire::to_json(h.s)}, {"e", wire::to_json(h.e)}, {"w", wire::to_json(h.w)},
            {"hand_quat", wire::quaternion_json(h.H)}};
}

JointVector q_of(const json& arm) {
    JointVector q;
    for (std::size_t i = 0; i < kNumJoints; ++i) q[i] = arm.at("q").at(i).get<double>();
    return q;
}

KeypointTrajectory sample() { return load_trajectory(data_path("trajectories/sample_rolling_punch.jsonl")); }

TEST(Session, HelloCarriesConfig) {
    sandbox::Session s(sample_bimanual(WristType::perpendicular));
    const json h = s.hello();
    EXPECT_EQ(h.at("type"), "config");
    EXPECT_EQ(h.at("protocol_version"), sandbox::kProtocolVersion);
    EXPECT_EQ(h.at("filter"), true);
    EXPECT_TRUE(h.at("params").contains("d_min"));
}

TEST(Session, MatchesReplayWithFilter) {
    const BimanualModel m = sample_bimanual(WristType::perpendicular);
    const KeypointTrajectory traj = sample();
    ReplayOptions opt;
    opt.filter = true;
    const ReplayReport rep = run_replay(m, traj, opt);
    sandbox::Session s(m);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const json out = s.handle(update_for(traj.records[i].raw));
        ASSERT_EQ(out.at("type"), "state") << out.dump();
        EXPECT_EQ(out.at("frame"), i + 1);
        // Hand quaternions are re-encoded here, so allow a few ulps.
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            EXPECT_NEAR(q_of(out.at("left"))[j], rep.rows[i].q_left[j], 1e-9);
            EXPECT_NEAR(q_of(out.at("right"))[j], rep.rows[i].q_right[j], 1e-9);
        }
        EXPECT_EQ(out.at("collision"), rep.rows[i].collision);
        EXPECT_EQ(out.at("flags").at("filter_status"), rep.rows[i].filter_status);
    }
}

TEST(Session, Deterministic) {
    const BimanualModel m = sample_bimanual(WristType::parallel);
    sandbox::Session a(m), b(m);
    for (const auto& r : sample().records) {
        json x = a.handle(update_for(r.raw)), y = b.handle(update_for(r.raw));
        x.erase("timing");
        y.erase("timing");
        EXPECT_EQ(x, y);
    }
}

TEST(Session, BodyFrameRoundTrip) {
    const BimanualModel m = sample_bimanual(WristType::perpendicular);
    sandbox::SessionOptions opt;
    opt.filter = false;
    sandbox::Session s(m, opt);
    std::mt19937_64 rng(81);
    BimanualPose q = s.pose();
    q.left[5] = q.right[5] = 0.8;  // keep the wrist away from its singular pose
    for (int step = 0; step < 30; ++step) {
        for (auto [arm, v] : {std::pair{&m.left, &q.left}, std::pair{&m.right, &q.right}}) {
            for (int i = 1; i <= kNumJoints; ++i) {
                double& a = (*v)[static_cast<std::size_t>(i - 1)];
                a = std::clamp(a + std::uniform_real_distribution<double>(-0.05, 0.05)(rng), arm->lower(i) + 0.05,
                               arm->upper(i) - 0.05);
            }
        }
        const json msg{{"type", "update"},
                       {"frame", "body"},
                       {"left", arm_for(human_input_from_pose(m.left, q.left))},
                       {"right", arm_for(human_input_from_pose(m.right, q.right))}};
        const json out = s.handle(msg);
        ASSERT_EQ(out.at("type"), "state") << out.dump();
        EXPECT_LT(out.at("errors").at("left").at("total").get<double>(), 1e-9);
        EXPECT_LT(out.at("errors").at("right").at("total").get<double>(), 1e-9);
        const RobotKeypoints k = fk(m.right, q.right);
        EXPECT_LT(norm(wire::vec3(out.at("right").at("t"), "t") - k.t), 1e-9);
    }
}

json crossing_update() {
    // Forearms cross in front of the chest.
    auto arm = [](double side) {
        const Vec3 s{0.0, side * 0.25, 0.0};
        const Vec3 w{0.38, -side * 0.12, -0.2};
        const Vec3 e = two_link_elbow(s, w, 0.30, 0.28, Vec3{0.0, side, -1.0});
        return json{{"s", wire::to_json(s)}, {"e", wire::to_json(e)}, {"w", wire::to_json(w)},
                    {"hand_quat", wire::quaternion_json(forearm_hand(e, w))}};
    };
    return {{"type", "update"}, {"frame", "body"}, {"left", arm(1.0)}, {"right", arm(-1.0)}};
}

TEST(Session, CrossingArmsFilterKeepsCapsulesApart) {
    const BimanualModel m = sample_bimanual(WristType::perpendicular);
    sandbox::SessionOptions off;
    off.filter = false;
    sandbox::Session raw(m, off);
    const json unfiltered = raw.handle(crossing_update());
    ASSERT_EQ(unfiltered.at("type"), "state") << unfiltered.dump();
    EXPECT_TRUE(unfiltered.at("collision").get<bool>());

    sandbox::Session s(m);
    const json out = s.handle(crossing_update());
    EXPECT_TRUE(out.at("flags").at("filter_active").get<bool>());
    EXPECT_FALSE(out.at("collision").get<bool>());
    EXPECT_GE(out.at("min_distance").get<double>(), s.params().d_min - 5e-3);
}

TEST(Session, RepeatedUpdateGivesSameAnswer) {
    sandbox::Session s(sample_bimanual(WristType::perpendicular));
    const json msg = update_for(sample().records[3].raw);
    s.handle(msg);
    const json a = s.handle(msg);
    const json b = s.handle(msg);
    EXPECT_EQ(a.at("left").at("q"), b.at("left").at("q"));
    EXPECT_EQ(a.at("right").at("q"), b.at("right").at("q"));
}

TEST(Session, StateQueryDoesNotAdvance) {
    sandbox::Session s(sample_bimanual(WristType::perpendicular));
    const json st = s.handle({{"type", "state"}, {"seq", 4}});
    EXPECT_EQ(st.at("type"), "state");
    EXPECT_EQ(st.at("seq"), 4);
    EXPECT_EQ(st.at("frame"), 0);
    EXPECT_FALSE(st.contains("timing"));
    EXPECT_EQ(st.at("left").at("chain").size(), 8u);
    EXPECT_FALSE(st.at("pairs").empty());
}

TEST(Session, ConfigToggleAndReset) {
    sandbox::Session s(sample_bimanual(WristType::perpendicular));
    const BimanualPose start = s.pose();
    EXPECT_EQ(s.handle({{"type", "config"}, {"filter", false}}).at("filter"), false);
    EXPECT_FALSE(s.filter_enabled());
    EXPECT_EQ(s.handle({{"type", "config"}, {"filter", true}}).at("filter"), true);
    EXPECT_TRUE(s.filter_enabled());
    s.handle(update_for(sample().records[0].raw));
    EXPECT_EQ(s.frames(), 1u);
    s.handle({{"type", "config"}, {"reset", true}});
    EXPECT_EQ(s.frames(), 0u);
    EXPECT_EQ(s.pose().left, start.left);
}

TEST(Session, BadConfigLeavesStateUnchanged) {
    sandbox::Session s(sample_bimanual(WristType::perpendicular));
    const FilterParams before = s.params();
    const json e = s.handle({{"type", "config"}, {"seq", 2}, {"filter", false}, {"params", {{"d_min", -1.0}}}});
    EXPECT_EQ(e.at("type"), "error");
    EXPECT_EQ(e.at("code"), "bad_message");
    EXPECT_EQ(e.at("seq"), 2);
    EXPECT_TRUE(s.filter_enabled());
    EXPECT_EQ(filter_params_json(s.params()), filter_params_json(before));
}

TEST(Session, ErrorCodes) {
    sandbox::Session s(sample_bimanual(WristType::perpendicular));
    EXPECT_EQ(s.handle_text("{not json").at("code"), "parse");
    EXPECT_EQ(s.handle_text("[1,2]").at("code"), "bad_message");
    EXPECT_EQ(s.handle({{"type", "dance"}}).at("code"), "unknown_type");
    json extra = update_for(sample().records[0].raw);
    extra["velocity"] = 1;
    EXPECT_EQ(s.handle(extra).at("code"), "bad_message");
    RawFrame bad = sample().records[0].raw;
    bad.torso = bad.left.s * 2.0 - bad.right.s;
    EXPECT_EQ(s.handle(update_for(bad)).at("code"), "degenerate");
    EXPECT_EQ(s.frames(), 0u);
}

}  // namespace
