#pragma once

// Keypoint trajectory files: JSON Lines, one frame per line, optional header
// line. Schema: docs/trajectory_format.md

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sewmimic/sync.hpp"
#include "sewmimic/wire.hpp"

namespace sewmimic {

inline constexpr int kTrajectoryFormatVersion = 1;

/// Frame convention of a trajectory file: raw tracker coordinates that
/// need syncing, or keypoints already in the body-centric frame.
enum class TrajectoryFrame { stream, body };

struct TrajectoryRecord {
    RawFrame raw;
    /// Set when the frame cannot be retargeted as-is (reason in `issue`).
    bool degenerate = false;
    std::string issue;
};

struct KeypointTrajectory {
    TrajectoryFrame frame = TrajectoryFrame::stream;
    std::vector<TrajectoryRecord> records;

    std::size_t size() const { return records.size(); }
};

namespace detail {

inline RawArm parse_arm(const wire::json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    RawArm a;
    auto need = [&](const char* k) -> const wire::json& {
        if (!j.contains(k)) throw ParseError(where + ": missing '" + k + "'");
        return j.at(k);
    };
    a.s = wire::vec3(need("s"), where + ".s");
    a.e = wire::vec3(need("e"), where + ".e");
    a.w = wire::vec3(need("w"), where + ".w");
    if (j.contains("hand_quat")) {
        a.hand = wire::quaternion(j.at("hand_quat"), where + ".hand_quat");
    } else if (j.contains("hand_matrix")) {
        a.hand = wire::matrix(j.at("hand_matrix"), where + ".hand_matrix");
    }
    if (j.contains("index")) a.index = wire::vec3(j.at("index"), where + ".index");
    if (j.contains("pinky")) a.pinky = wire::vec3(j.at("pinky"), where + ".pinky");
    if (!a.hand && !(a.index && a.pinky)) {
        throw ParseError(where + ": needs 'hand_quat', 'hand_matrix', or both 'index' and 'pinky'");
    }
    return a;
}

inline std::string degeneracy(const RawFrame& f, TrajectoryFrame kind) {
    for (const auto* arm : {&f.left, &f.right}) {
        const char* side = arm == &f.left ? "left" : "right";
        if (norm(arm->e - arm->s) < kDegenerateEps) return std::string(side) + " upper arm has zero length";
        if (norm(arm->w - arm->e) < kDegenerateEps) return std::string(side) + " lower arm has zero length";
        if (!arm->hand) {
            try {
                (void)make_frame(*arm->index, *arm->pinky, arm->w);
            } catch (const DegenerateError&) {
                return std::string(side) + " finger keypoints are collinear with the wrist";
            }
        }
    }
    if (kind == TrajectoryFrame::stream) {
        try {
            (void)body_frame(f);
        } catch (const DegenerateError&) {
            return "shoulders and torso anchor are collinear";
        }
    }
    return {};
}

}  // namespace detail

inline RawFrame parse_frame(const wire::json& j, TrajectoryFrame kind = TrajectoryFrame::stream) {
    if (!j.is_object()) throw ParseError("frame: expected an object");
    RawFrame f;
    if (!j.contains("t") || !j.at("t").is_number()) throw ParseError("frame: missing numeric 't'");
    f.t = j.at("t").get<double>();
    if (j.contains("torso")) {
        f.torso = wire::vec3(j.at("torso"), "torso");
    } else if (kind == TrajectoryFrame::stream) {
        throw ParseError("frame: missing 'torso'");
    }
    if (!j.contains("left") || !j.contains("right")) throw ParseError("frame: needs 'left' and 'right'");
    f.left = detail::parse_arm(j.at("left"), "left");
    f.right = detail::parse_arm(j.at("right"), "right");
    return f;
}

inline KeypointTrajectory read_trajectory(std::istream& in) {
    KeypointTrajectory traj;
    std::string line;
    int line_no = 0;
    bool seen_frame = false;
    double last_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::string where = "line " + std::to_string(line_no);
        try {
            const auto j = wire::json::parse(line);
            if (j.contains("format")) {
                if (seen_frame) throw ParseError("header must precede all frames");
                if (j.at("format") != "sew-trajectory") throw ParseError("unknown format '" + j.at("format").dump() + "'");
                if (j.value("format_version", 0) != kTrajectoryFormatVersion) throw ParseError("unsupported format_version");
                const std::string frame = j.value("frame", std::string("stream"));
                if (frame == "stream") {
                    traj.frame = TrajectoryFrame::stream;
                } else if (frame == "body") {
                    traj.frame = TrajectoryFrame::body;
                } else {
                    throw ParseError("frame must be 'stream' or 'body'");
                }
                continue;
            }
            seen_frame = true;
            TrajectoryRecord rec;
            rec.raw = parse_frame(j, traj.frame);
            if (!(rec.raw.t > last_t)) throw ParseError("timestamps must be strictly increasing");
            last_t = rec.raw.t;
            rec.issue = detail::degeneracy(rec.raw, traj.frame);
            rec.degenerate = !rec.issue.empty();
            traj.records.push_back(std::move(rec));
        } catch (const wire::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return traj;
}

inline KeypointTrajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trajectory '" + path + "'");
    try {
        return read_trajectory(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline wire::json arm_json(const RawArm& a) {
    wire::json j{{"s", wire::to_json(a.s)}, {"e", wire::to_json(a.e)}, {"w", wire::to_json(a.w)}};
    if (a.hand) j["hand_quat"] = wire::quaternion_json(*a.hand);
    if (a.index) j["index"] = wire::to_json(*a.index);
    if (a.pinky) j["pinky"] = wire::to_json(*a.pinky);
    return j;
}

inline wire::json frame_json(const RawFrame& f) {
    return {{"t", f.t}, {"torso", wire::to_json(f.torso)}, {"left", arm_json(f.left)}, {"right", arm_json(f.right)}};
}

inline void write_trajectory(std::ostream& out, const KeypointTrajectory& traj) {
    out << wire::json{{"format", "sew-trajectory"},
                      {"format_version", kTrajectoryFormatVersion},
                      {"frame", traj.frame == TrajectoryFrame::stream ? "stream" : "body"}}
               .dump()
        << '\n';
    for (const auto& r : traj.records) out << frame_json(r.raw).dump() << '\n';
}

/// Body-centric inputs for one record; throws DegenerateError for a
/// degenerate torso triangle.
inline BimanualInput body_input(const KeypointTrajectory& traj, std::size_t i, const SyncOptions& opt = {}) {
    const RawFrame& f = traj.records.at(i).raw;
    if (traj.frame == TrajectoryFrame::stream) return sync_frames(f, opt);
    const Frame identity = Frame::identity();
    return {detail::sync_arm(f.left, identity, opt.hand_align_left, opt.finger_align),
            detail::sync_arm(f.right, identity, opt.hand_align_right, opt.finger_align)};
}

}  // namespace sewmimic
