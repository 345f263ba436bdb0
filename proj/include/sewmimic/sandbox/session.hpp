#pragma once

// One operator session of the sandbox service: message in, message out, no
// I/O. Protocol: docs/sandbox_protocol.md

#include <chrono>
#include <string>

#include "sewmimic/params_io.hpp"
#include "sewmimic/safety_filter.hpp"
#include "sewmimic/trajectory.hpp"
#include "sewmimic/wire.hpp"

namespace sewmimic::sandbox {

using wire::json;

inline constexpr int kProtocolVersion = 1;

struct SessionOptions {
    bool filter = true;
    FilterParams params;
    SyncOptions sync;
};

class Session {
public:
    explicit Session(BimanualModel models, SessionOptions opt = {})
        : models_(std::move(models)), filter_(opt.filter), params_(opt.params), sync_(opt.sync) {
        params_.validate();
        reset_pose();
    }

    const BimanualPose& pose() const { return q_; }
    bool filter_enabled() const { return filter_; }
    const FilterParams& params() const { return params_; }
    std::uint64_t frames() const { return frames_; }
    const BimanualModel& models() const { return models_; }

    /// Sent once when a client connects.
    json hello() const {
        json j = config_message();
        j["models"] = {{"left", models_.left.name}, {"right", models_.right.name}};
        j["wrist_type"] = to_string(models_.right.wrist_type);
        return j;
    }

    /// Raw text entry point used by the transport.
    json handle_text(const std::string& text) {
        json msg;
        try {
            msg = json::parse(text);
        } catch (const json::parse_error& e) {
            return error("parse", e.what(), nullptr);
        }
        return handle(msg);
    }

    json handle(const json& msg) {
        if (!msg.is_object()) return error("bad_message", "message must be a JSON object", nullptr);
        const json seq = msg.value("seq", json());
        const std::string type = msg.value("type", std::string());
        try {
            if (type == "update") return handle_update(msg, seq);
            if (type == "config") return handle_config(msg, seq);
            if (type == "state") return state_message(seq, nullptr);
            return error("unknown_type", "unknown message type '" + type + "'", seq);
        } catch (const DegenerateError& e) {
            return error("degenerate", e.what(), seq);
        } catch (const ParseError& e) {
            return error("bad_message", e.what(), seq);
        } catch (const InvariantError& e) {
            return error("bad_message", e.what(), seq);
        } catch (const json::exception& e) {
            return error("bad_message", e.what(), seq);
        }
    }

private:
    struct Solve {
        BimanualInput input;
        RetargetResult left;
        RetargetResult right;
        bool filter_active = false;
        std::string filter_status = "off";
        double filter_ms = 0.0;
        double total_ms = 0.0;
    };

    void reset_pose() {
        q_ = {clamp_to_limits(models_.left, JointVector{}), clamp_to_limits(models_.right, JointVector{})};
    }

    json handle_update(const json& msg, const json& seq) {
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        for (const auto& [key, v] : msg.items()) {
            (void)v;
            if (key != "type" && key != "seq" && key != "frame" && key != "t" && key != "torso" && key != "left" &&
                key != "right") {
                throw ParseError("update: unknown field '" + key + "'");
            }
        }
        const std::string frame = msg.value("frame", std::string("stream"));
        KeypointTrajectory one;
        if (frame == "stream") {
            one.frame = TrajectoryFrame::stream;
        } else if (frame == "body") {
            one.frame = TrajectoryFrame::body;
        } else {
            throw ParseError("update: frame must be 'stream' or 'body'");
        }
        json body = msg;
        if (!body.contains("t")) body["t"] = 0.0;
        TrajectoryRecord rec;
        rec.raw = parse_frame(body, one.frame);
        one.records.push_back(rec);

        Solve s;
        s.input = body_input(one, 0, sync_);
        s.left = sew_mimic(models_.left, q_.left, s.input.left);
        s.right = sew_mimic(models_.right, q_.right, s.input.right);
        BimanualPose out{s.left.q, s.right.q};
        if (filter_) {
            const auto f0 = clock::now();
            const FilterResult f = safety_filter(models_, q_, out, params_);
            s.filter_ms = std::chrono::duration<double, std::milli>(clock::now() - f0).count();
            out = f.q;
            s.filter_active = f.active || f.status == FilterStatus::held;
            s.filter_status = to_string(f.status);
            if (f.status == FilterStatus::safe && f.active) {
                s.left.flags = f.flags_left;
                s.right.flags = f.flags_right;
            }
        }
        s.left.q = out.left;
        s.right.q = out.right;
        q_ = out;
        ++frames_;
        s.total_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        return state_message(seq, &s);
    }

    json handle_config(const json& msg, const json& seq) {
        bool filter = filter_;
        FilterParams params = params_;
        bool reset = false;
        for (const auto& [key, v] : msg.items()) {
            if (key == "type" || key == "seq") continue;
            if (key == "filter") {
                if (!v.is_boolean()) throw ParseError("config: 'filter' must be a boolean");
                filter = v.get<bool>();
            } else if (key == "params") {
                params = apply_filter_params(params, v);
            } else if (key == "reset") {
                if (!v.is_boolean()) throw ParseError("config: 'reset' must be a boolean");
                reset = v.get<bool>();
            } else {
                throw ParseError("config: unknown field '" + key + "'");
            }
        }
        filter_ = filter;
        params_ = params;
        if (reset) {
            reset_pose();
            frames_ = 0;
        }
        json j = config_message();
        j["seq"] = seq;
        return j;
    }

    json config_message() const {
        return {{"type", "config"},
                {"protocol_version", kProtocolVersion},
                {"filter", filter_},
                {"params", filter_params_json(params_)}};
    }

    static json costs_json(const ProblemCosts& c) {
        return {{"upper", c.upper}, {"lower", c.lower}, {"wrist", c.wrist}, {"total", c.total()}};
    }

    static json flags_json(const RetargetFlags& f) {
        return {{"clamped_shoulder", f.clamped_shoulder}, {"clamped_elbow", f.clamped_elbow},
                {"clamped_wrist", f.clamped_wrist},       {"degenerate_upper", f.degenerate_upper},
                {"degenerate_lower", f.degenerate_lower}, {"degenerate_wrist", f.degenerate_wrist},
                {"gimbal", f.gimbal}};
    }

    json arm_json(const RobotArmModel& m, const JointVector& q) const {
        const ChainPose chain = evaluate_chain(m, q);
        const RobotKeypoints k = fk(m, q);
        json origins = json::array();
        for (int i = 1; i <= kNumJoints; ++i) origins.push_back(wire::to_json(chain.origin[static_cast<std::size_t>(i)]));
        origins.push_back(wire::to_json(k.t));
        json qa = json::array();
        for (std::size_t i = 0; i < kNumJoints; ++i) qa.push_back(q[i]);
        return {{"q", qa},
                {"chain", origins},
                {"s", wire::to_json(k.s)},
                {"e", wire::to_json(k.e)},
                {"w", wire::to_json(k.w)},
                {"t", wire::to_json(k.t)},
                {"tool_quat", wire::quaternion_json(k.T)}};
    }

    json state_message(const json& seq, const Solve* s) const {
        const CapsuleSet caps = make_capsules(models_, bimanual_keypoints(models_, q_));
        auto name = [&](std::size_t i) {
            return i < kNumCapsules ? std::string(to_string(caps[i].tag)) : "fixed_" + std::to_string(i - kNumCapsules);
        };
        json capsules = json::array();
        for (std::size_t i = 0; i < caps.size(); ++i) {
            capsules.push_back(
                {{"name", name(i)}, {"p1", wire::to_json(caps[i].p1)}, {"p2", wire::to_json(caps[i].p2)}, {"r", caps[i].r}});
        }
        json pairs = json::array();
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& p : pair_distances(caps)) {
            pairs.push_back({{"a", name(p.i)}, {"b", name(p.j)}, {"d", p.d}});
            dmin = std::min(dmin, p.d);
        }
        json j{{"type", "state"},
               {"protocol_version", kProtocolVersion},
               {"seq", seq},
               {"frame", frames_},
               {"filter", filter_},
               {"left", arm_json(models_.left, q_.left)},
               {"right", arm_json(models_.right, q_.right)},
               {"capsules", capsules},
               {"pairs", pairs},
               {"min_distance", dmin},
               {"collision", dmin < 0.0}};
        if (s) {
            j["errors"] = {{"left", costs_json(problem_costs(models_.left, q_.left, s->input.left))},
                           {"right", costs_json(problem_costs(models_.right, q_.right, s->input.right))}};
            j["flags"] = {{"left", flags_json(s->left.flags)},
                          {"right", flags_json(s->right.flags)},
                          {"filter_active", s->filter_active},
                          {"filter_status", s->filter_status}};
            j["timing"] = {{"solve_ms_left", 1e3 * s->left.solve_seconds},
                           {"solve_ms_right", 1e3 * s->right.solve_seconds},
                           {"filter_ms", s->filter_ms},
                           {"total_ms", s->total_ms}};
        }
        return j;
    }

    static json error(const std::string& code, const std::string& message, const json& seq) {
        return {{"type", "error"}, {"protocol_version", kProtocolVersion}, {"seq", seq}, {"code", code}, {"message", message}};
    }

    BimanualModel models_;
    bool filter_ = true;
    FilterParams params_;
    SyncOptions sync_;
    BimanualPose q_;
    std::uint64_t frames_ = 0;
};

}  // namespace sewmimic::sandbox
