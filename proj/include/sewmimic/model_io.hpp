#pragma once

// Robot description files (JSON, "format_version": 1). Schema: docs/robot_format.md

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sewmimic/robot_model.hpp"

namespace sewmimic {

inline constexpr int kRobotFormatVersion = 1;

namespace detail {

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ParseError(what + ": expected an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ParseError(what + ": expected numbers");
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

/// {"matrix": [9 numbers, row-major]} or {"axis_angle": [x, y, z, radians]}.
inline Rot3 parse_rotation(const nlohmann::json& j, const std::string& what) {
    if (!j.is_object()) throw ParseError(what + ": expected an object with 'matrix' or 'axis_angle'");
    if (j.contains("matrix")) {
        const auto& m = j.at("matrix");
        if (!m.is_array() || m.size() != 9) throw ParseError(what + ".matrix: expected 9 numbers");
        std::array<double, 9> rows{};
        for (std::size_t i = 0; i < 9; ++i) {
            if (!m[i].is_number()) throw ParseError(what + ".matrix: expected numbers");
            rows[i] = m[i].get<double>();
        }
        const Rot3 r = Rot3::from_rows(rows);
        // Hand-authored entries such as 0.7071 are accepted and re-orthonormalized.
        if (orthonormality_error(r) > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
            throw ParseError(what + ".matrix: not a rotation matrix");
        }
        return orthonormalize(r);
    }
    if (j.contains("axis_angle")) {
        const auto& a = j.at("axis_angle");
        if (!a.is_array() || a.size() != 4) throw ParseError(what + ".axis_angle: expected [x, y, z, angle]");
        const Vec3 axis{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
        if (norm(axis) < kDegenerateEps) throw ParseError(what + ".axis_angle: zero axis");
        return rodrigues(normalize(axis), a[3].get<double>());
    }
    throw ParseError(what + ": expected 'matrix' or 'axis_angle'");
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing required field '" + key + "'");
    return j.at(key);
}

inline nlohmann::json rotation_to_json(const Rot3& r) {
    return {{"matrix", r.data()}};
}

inline nlohmann::json vec_to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

}  // namespace detail

inline RobotArmModel parse_model(const nlohmann::json& doc) {
    using detail::parse_rotation;
    using detail::parse_vec3;
    using detail::require;

    if (!doc.is_object()) throw ParseError("robot description: top level must be an object");
    const auto& version = require(doc, "format_version", "robot description");
    if (!version.is_number_integer() || version.get<int>() != kRobotFormatVersion) {
        throw ParseError("robot description: unsupported format_version");
    }

    RobotArmModel m;
    try {
        m.name = doc.value("name", std::string("unnamed"));
        const auto side = require(doc, "side", "robot description").get<std::string>();
        if (side == "left") {
            m.side = Side::left;
        } else if (side == "right") {
            m.side = Side::right;
        } else {
            throw ParseError("side: expected 'left' or 'right'");
        }
        const auto wrist = require(doc, "wrist_type", "robot description").get<std::string>();
        if (wrist == "parallel") {
            m.wrist_type = WristType::parallel;
        } else if (wrist == "perpendicular") {
            m.wrist_type = WristType::perpendicular;
        } else {
            throw ParseError("wrist_type: expected 'parallel' or 'perpendicular'");
        }

        const auto& joints = require(doc, "joints", "robot description");
        if (!joints.is_array() || joints.size() != kNumJoints) throw ParseError("joints: expected exactly 7 entries");
        for (std::size_t i = 0; i < kNumJoints; ++i) {
            const auto& jj = joints[i];
            const std::string where = "joints[" + std::to_string(i) + "]";
            Joint& j = m.joints[i];
            const Vec3 axis = parse_vec3(require(jj, "axis", where), where + ".axis");
            if (norm(axis) < kDegenerateEps) throw ParseError(where + ".axis: zero vector");
            j.axis = normalize(axis);
            j.local_rotation = jj.contains("rotation") ? parse_rotation(jj.at("rotation"), where + ".rotation") : Rot3{};
            j.local_translation = parse_vec3(require(jj, "translation", where), where + ".translation");
            const auto& lim = require(jj, "limits", where);
            if (!lim.is_array() || lim.size() != 2) throw ParseError(where + ".limits: expected [lower, upper]");
            j.lower = lim[0].get<double>();
            j.upper = lim[1].get<double>();
        }

        const auto& tool = require(doc, "tool", "robot description");
        m.tool_rotation = tool.contains("rotation") ? parse_rotation(tool.at("rotation"), "tool.rotation") : Rot3{};
        m.tool_translation = parse_vec3(require(tool, "translation", "tool"), "tool.translation");
        m.r_align = parse_rotation(require(doc, "r_align", "robot description"), "r_align");

        if (doc.contains("keypoint_joints")) {
            const auto& kp = doc.at("keypoint_joints");
            m.keypoint_joints.shoulder = kp.value("shoulder", 1);
            m.keypoint_joints.elbow = kp.value("elbow", 4);
            m.keypoint_joints.wrist = kp.value("wrist", 6);
        }

        const auto& radii = require(doc, "capsule_radii", "robot description");
        m.radii.torso = require(radii, "torso", "capsule_radii").get<double>();
        m.radii.upper = require(radii, "upper", "capsule_radii").get<double>();
        m.radii.lower = require(radii, "lower", "capsule_radii").get<double>();
        m.radii.hand = require(radii, "hand", "capsule_radii").get<double>();

        if (doc.contains("torso")) {
            const auto& t = doc.at("torso");
            m.torso.p1 = parse_vec3(require(t, "p1", "torso"), "torso.p1");
            m.torso.p2 = parse_vec3(require(t, "p2", "torso"), "torso.p2");
        }

        if (doc.contains("base")) {
            // Fold the arm's mounting pose into the first joint's local transform.
            const auto& b = doc.at("base");
            const Rot3 r = b.contains("rotation") ? parse_rotation(b.at("rotation"), "base.rotation") : Rot3{};
            const Vec3 o = b.contains("origin") ? parse_vec3(b.at("origin"), "base.origin") : Vec3{};
            Joint& j1 = m.joints[0];
            j1.local_translation = o + r * j1.local_translation;
            j1.local_rotation = r * j1.local_rotation;
        }

        if (doc.contains("extra_capsules")) {
            for (const auto& c : doc.at("extra_capsules")) {
                StaticCapsule sc;
                sc.name = c.value("name", std::string("static"));
                sc.p1 = parse_vec3(require(c, "p1", "extra_capsules"), "extra_capsules.p1");
                sc.p2 = parse_vec3(require(c, "p2", "extra_capsules"), "extra_capsules.p2");
                sc.radius = require(c, "radius", "extra_capsules").get<double>();
                m.extra_capsules.push_back(sc);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("robot description: ") + e.what());
    }

    validate_model(m);
    return m;
}

inline RobotArmModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open robot description '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        return parse_model(doc);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline nlohmann::json model_to_json(const RobotArmModel& m) {
    using detail::rotation_to_json;
    using detail::vec_to_json;
    nlohmann::json doc;
    doc["format_version"] = kRobotFormatVersion;
    doc["name"] = m.name;
    doc["side"] = to_string(m.side);
    doc["wrist_type"] = to_string(m.wrist_type);
    doc["joints"] = nlohmann::json::array();
    for (const auto& j : m.joints) {
        doc["joints"].push_back({{"axis", vec_to_json(j.axis)},
                                 {"rotation", rotation_to_json(j.local_rotation)},
                                 {"translation", vec_to_json(j.local_translation)},
                                 {"limits", {j.lower, j.upper}}});
    }
    doc["tool"] = {{"rotation", rotation_to_json(m.tool_rotation)}, {"translation", vec_to_json(m.tool_translation)}};
    doc["r_align"] = rotation_to_json(m.r_align);
    doc["keypoint_joints"] = {{"shoulder", m.keypoint_joints.shoulder},
                              {"elbow", m.keypoint_joints.elbow},
                              {"wrist", m.keypoint_joints.wrist}};
    doc["capsule_radii"] = {{"torso", m.radii.torso}, {"upper", m.radii.upper}, {"lower", m.radii.lower}, {"hand", m.radii.hand}};
    doc["torso"] = {{"p1", vec_to_json(m.torso.p1)}, {"p2", vec_to_json(m.torso.p2)}};
    if (!m.extra_capsules.empty()) {
        doc["extra_capsules"] = nlohmann::json::array();
        for (const auto& c : m.extra_capsules) {
            doc["extra_capsules"].push_back({{"name", c.name}, {"p1", vec_to_json(c.p1)}, {"p2", vec_to_json(c.p2)}, {"radius", c.radius}});
        }
    }
    return doc;
}

}  // namespace sewmimic
