#pragma once

// Replay reports as CSV or JSON Lines. Column order and meaning:
// docs/report_format.md

#include <cmath>
#include <cstdio>
#include <limits>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sewmimic/replay.hpp"

namespace sewmimic {

enum class ReportFormat { csv, jsonl };

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "jsonl") return ReportFormat::jsonl;
    throw ParseError("unknown report format '" + s + "' (expected csv or jsonl)");
}

namespace detail {

enum class ColumnKind { integer, real, flag, text };

struct Column {
    std::string name;
    ColumnKind kind;
    std::function<double&(FrameRow&)> real;  // real/integer-as-double unused for int and text
    std::function<bool&(FrameRow&)> flag;
    std::function<std::string&(FrameRow&)> text;
};

inline const std::vector<Column>& columns() {
    static const std::vector<Column> cols = [] {
        std::vector<Column> c;
        auto real = [&](std::string n, std::function<double&(FrameRow&)> f) {
            c.push_back({std::move(n), ColumnKind::real, std::move(f), {}, {}});
        };
        auto flag = [&](std::string n, std::function<bool&(FrameRow&)> f) {
            c.push_back({std::move(n), ColumnKind::flag, {}, std::move(f), {}});
        };
        auto text = [&](std::string n, std::function<std::string&(FrameRow&)> f) {
            c.push_back({std::move(n), ColumnKind::text, {}, {}, std::move(f)});
        };
        c.push_back({"frame", ColumnKind::integer, {}, {}, {}});
        real("t", [](FrameRow& r) -> double& { return r.t; });
        text("status", [](FrameRow& r) -> std::string& { return r.status; });
        real("err_left_upper", [](FrameRow& r) -> double& { return r.left.upper; });
        real("err_left_lower", [](FrameRow& r) -> double& { return r.left.lower; });
        real("err_left_wrist", [](FrameRow& r) -> double& { return r.left.wrist; });
        real("err_right_upper", [](FrameRow& r) -> double& { return r.right.upper; });
        real("err_right_lower", [](FrameRow& r) -> double& { return r.right.lower; });
        real("err_right_wrist", [](FrameRow& r) -> double& { return r.right.wrist; });
        real("err_total", [](FrameRow& r) -> double& { return r.err_total; });
        real("solve_ms_left", [](FrameRow& r) -> double& { return r.solve_ms_left; });
        real("solve_ms_right", [](FrameRow& r) -> double& { return r.solve_ms_right; });
        real("filter_ms", [](FrameRow& r) -> double& { return r.filter_ms; });
        real("frame_ms", [](FrameRow& r) -> double& { return r.frame_ms; });
        real("min_distance", [](FrameRow& r) -> double& { return r.min_distance; });
        flag("collision", [](FrameRow& r) -> bool& { return r.collision; });
        flag("desired_collision", [](FrameRow& r) -> bool& { return r.desired_collision; });
        text("filter_status", [](FrameRow& r) -> std::string& { return r.filter_status; });
        flag("filter_active", [](FrameRow& r) -> bool& { return r.filter_active; });
        flag("clamped", [](FrameRow& r) -> bool& { return r.clamped; });
        flag("degenerate", [](FrameRow& r) -> bool& { return r.degenerate; });
        flag("gimbal", [](FrameRow& r) -> bool& { return r.gimbal; });
        flag("branch_switch", [](FrameRow& r) -> bool& { return r.branch_switch; });
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            real("q_left_" + std::to_string(j + 1), [j](FrameRow& r) -> double& { return r.q_left[j]; });
        }
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            real("q_right_" + std::to_string(j + 1), [j](FrameRow& r) -> double& { return r.q_right[j]; });
        }
        return c;
    }();
    return cols;
}

/// %.17g round-trips every finite double; NaN is written as "nan".
inline std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_real(const std::string& s, const std::string& where) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ParseError(where + ": not a number: '" + s + "'");
    return v;
}

inline std::string cell(FrameRow& r, const Column& c) {
    switch (c.kind) {
        case ColumnKind::integer: return std::to_string(r.index);
        case ColumnKind::real: return format_real(c.real(r));
        case ColumnKind::flag: return c.flag(r) ? "1" : "0";
        case ColumnKind::text: return c.text(r);
    }
    return {};
}

inline nlohmann::json json_number(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json stats_json(const Stats& s) {
    return {{"median", json_number(s.median)}, {"iqr", json_number(s.iqr)}, {"mean", json_number(s.mean)}};
}

}  // namespace detail

inline std::vector<std::string> report_columns() {
    std::vector<std::string> names;
    for (const auto& c : detail::columns()) names.push_back(c.name);
    return names;
}

inline void write_csv(std::ostream& out, const ReplayReport& report) {
    const auto& cols = detail::columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
    out << '\n';
    for (FrameRow row : report.rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << detail::cell(row, cols[i]);
        out << '\n';
    }
}

inline std::vector<FrameRow> read_csv(std::istream& in) {
    const auto& cols = detail::columns();
    std::string line;
    if (!std::getline(in, line)) throw ParseError("report: empty file");
    {
        std::vector<std::string> header;
        std::stringstream ss(line);
        for (std::string h; std::getline(ss, h, ',');) header.push_back(h);
        if (header != report_columns()) throw ParseError("report: unexpected header");
    }
    std::vector<FrameRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "report line " + std::to_string(line_no);
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() != cols.size()) throw ParseError(where + ": expected " + std::to_string(cols.size()) + " cells");
        FrameRow r;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto& c = cols[i];
            switch (c.kind) {
                case detail::ColumnKind::integer: r.index = static_cast<int>(detail::parse_real(cells[i], where)); break;
                case detail::ColumnKind::real: c.real(r) = detail::parse_real(cells[i], where); break;
                case detail::ColumnKind::flag:
                    if (cells[i] != "0" && cells[i] != "1") throw ParseError(where + ": bad flag in '" + c.name + "'");
                    c.flag(r) = cells[i] == "1";
                    break;
                case detail::ColumnKind::text: c.text(r) = cells[i]; break;
            }
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline nlohmann::json summary_json(const ReplaySummary& s, bool filter) {
    return {{"type", "summary"},
            {"filter", filter},
            {"frames", s.frames},
            {"timed_frames", s.timed_frames},
            {"err_total", detail::stats_json(s.err_total)},
            {"solve_ms", detail::stats_json(s.solve_ms)},
            {"filter_ms", detail::stats_json(s.filter_ms)},
            {"frame_ms", detail::stats_json(s.frame_ms)},
            {"collision_frames", s.collision_frames},
            {"collision_fraction", s.collision_fraction()},
            {"desired_collision_frames", s.desired_collision_frames},
            {"held_frames", s.held_frames},
            {"filter_held_frames", s.filter_held_frames},
            {"filter_active_frames", s.filter_active_frames},
            {"clamped_frames", s.clamped_frames},
            {"degenerate_frames", s.degenerate_frames},
            {"gimbal_frames", s.gimbal_frames},
            {"branch_switches", s.branch_switches}};
}

inline nlohmann::json row_json(FrameRow row) {
    nlohmann::json j{{"type", "frame"}};
    for (const auto& c : detail::columns()) {
        switch (c.kind) {
            case detail::ColumnKind::integer: j[c.name] = row.index; break;
            case detail::ColumnKind::real: j[c.name] = detail::json_number(c.real(row)); break;
            case detail::ColumnKind::flag: j[c.name] = c.flag(row); break;
            case detail::ColumnKind::text: j[c.name] = c.text(row); break;
        }
    }
    return j;
}

/// First line is the summary, then one object per frame.
inline void write_jsonl(std::ostream& out, const ReplayReport& report) {
    out << summary_json(report.summary(), report.filter).dump() << '\n';
    for (const auto& r : report.rows) out << row_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << '\n';
}

inline std::vector<FrameRow> read_jsonl(std::istream& in) {
    std::vector<FrameRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "report line " + std::to_string(line_no);
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.value("type", "") == "summary") continue;
            if (j.value("type", "") != "frame") throw ParseError("expected type 'frame' or 'summary'");
            FrameRow r;
            for (const auto& c : detail::columns()) {
                const auto& v = j.at(c.name);
                switch (c.kind) {
                    case detail::ColumnKind::integer: r.index = v.get<int>(); break;
                    case detail::ColumnKind::real:
                        c.real(r) = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
                        break;
                    case detail::ColumnKind::flag: c.flag(r) = v.get<bool>(); break;
                    case detail::ColumnKind::text: c.text(r) = v.get<std::string>(); break;
                }
            }
            rows.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return rows;
}

inline void write_report(std::ostream& out, const ReplayReport& report, ReportFormat f) {
    if (f == ReportFormat::csv) {
        write_csv(out, report);
    } else {
        write_jsonl(out, report);
    }
}

inline std::vector<FrameRow> read_report(std::istream& in, ReportFormat f) {
    return f == ReportFormat::csv ? read_csv(in) : read_jsonl(in);
}

/// Human-readable summary block printed by the CLI.
inline std::string summary_text(const ReplaySummary& s, bool filter) {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "frames %zu (timed %zu), filter %s\n"
                  "alignment error  mean %.6g  median %.6g  iqr %.6g\n"
                  "solve ms/arm     median %.6g  iqr %.6g  mean %.6g\n"
                  "filter ms        median %.6g  iqr %.6g  mean %.6g\n"
                  "frame ms         median %.6g  iqr %.6g  mean %.6g\n"
                  "collision frames %zu (%.2f%%), before filter %zu\n"
                  "held %zu, filter held %zu, filter active %zu\n"
                  "clamped %zu, degenerate %zu, gimbal %zu, branch switches %zu\n",
                  s.frames, s.timed_frames, filter ? "on" : "off", s.err_total.mean, s.err_total.median,
                  s.err_total.iqr, s.solve_ms.median, s.solve_ms.iqr, s.solve_ms.mean, s.filter_ms.median,
                  s.filter_ms.iqr, s.filter_ms.mean, s.frame_ms.median, s.frame_ms.iqr, s.frame_ms.mean,
                  s.collision_frames, 100.0 * s.collision_fraction(), s.desired_collision_frames, s.held_frames,
                  s.filter_held_frames, s.filter_active_frames, s.clamped_frames, s.degenerate_frames, s.gimbal_frames,
                  s.branch_switches);
    return buf;
}

}  // namespace sewmimic
