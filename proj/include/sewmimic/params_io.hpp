#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sewmimic/safety_filter.hpp"

namespace sewmimic {

/// Overlay the fields present in `j` onto `base`. Unknown names are errors
/// so that typos do not silently fall back to defaults.
inline FilterParams apply_filter_params(FilterParams base, const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("filter params: expected an object");
    auto number = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number()) throw ParseError("filter params: '" + key + "' must be a number");
        return v.get<double>();
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "d_min") {
            base.d_min = number(v, key);
        } else if (key == "d_act") {
            base.d_act = number(v, key);
        } else if (key == "d_rel") {
            base.d_rel = number(v, key);
        } else if (key == "alpha") {
            base.alpha = number(v, key);
        } else if (key == "n_iter") {
            if (!v.is_number_integer()) throw ParseError("filter params: 'n_iter' must be an integer");
            base.n_iter = v.get<int>();
        } else if (key == "length_eps") {
            base.length_eps = number(v, key);
        } else if (key == "length_tol") {
            base.length_tol = number(v, key);
        } else if (key == "length_sweeps") {
            if (!v.is_number_integer()) throw ParseError("filter params: 'length_sweeps' must be an integer");
            base.length_sweeps = v.get<int>();
        } else if (key == "free_tolerance") {
            base.free_tolerance = number(v, key);
        } else if (key == "weights") {
            if (!v.is_object()) throw ParseError("filter params: 'weights' must be an object");
            for (const auto& [wk, wv] : v.items()) {
                if (wk == "shoulder") {
                    base.weights.shoulder = number(wv, wk);
                } else if (wk == "elbow") {
                    base.weights.elbow = number(wv, wk);
                } else if (wk == "wrist") {
                    base.weights.wrist = number(wv, wk);
                } else if (wk == "tool") {
                    base.weights.tool = number(wv, wk);
                } else {
                    throw ParseError("filter params: unknown weight '" + wk + "'");
                }
            }
        } else {
            throw ParseError("filter params: unknown field '" + key + "'");
        }
    }
    try {
        base.validate();
    } catch (const InvariantError& e) {
        throw ParseError(e.what());
    }
    return base;
}

inline nlohmann::json filter_params_json(const FilterParams& p) {
    return {{"d_min", p.d_min},
            {"d_act", p.d_act},
            {"d_rel", p.d_rel},
            {"alpha", p.alpha},
            {"n_iter", p.n_iter},
            {"length_eps", p.length_eps},
            {"length_tol", p.length_tol},
            {"length_sweeps", p.length_sweeps},
            {"free_tolerance", p.free_tolerance},
            {"weights",
             {{"shoulder", p.weights.shoulder},
              {"elbow", p.weights.elbow},
              {"wrist", p.weights.wrist},
              {"tool", p.weights.tool}}}};
}

inline FilterParams load_filter_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open params file '" + path + "'");
    try {
        return apply_filter_params({}, nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace sewmimic
