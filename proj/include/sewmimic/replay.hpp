#pragma once

// Sequential trajectory replay: retarget both arms frame by frame (chaining
// the previous pose), optionally filter, and record errors, timing and
// collision statistics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sewmimic/safety_filter.hpp"
#include "sewmimic/trajectory.hpp"

namespace sewmimic {

struct FrameRow {
    int index = 0;
    double t = 0.0;
    /// "ok", or "held" when the frame could not be synced and the previous pose was kept.
    std::string status = "ok";
    ProblemCosts left;
    ProblemCosts right;
    double err_total = 0.0;
    double solve_ms_left = 0.0;
    double solve_ms_right = 0.0;
    double filter_ms = 0.0;
    double frame_ms = 0.0;
    double min_distance = 0.0;
    bool collision = false;          // output pose
    bool desired_collision = false;  // unfiltered retargeting result
    std::string filter_status = "off";  // off | safe | held
    bool filter_active = false;
    bool clamped = false;
    bool degenerate = false;
    bool gimbal = false;
    bool branch_switch = false;
    JointVector q_left;
    JointVector q_right;

    friend bool operator==(const FrameRow&, const FrameRow&) = default;
};

struct Stats {
    double median = std::numeric_limits<double>::quiet_NaN();
    double iqr = std::numeric_limits<double>::quiet_NaN();
    double mean = std::numeric_limits<double>::quiet_NaN();
};

/// Linear-interpolation quantiles (the common "type 7" definition).
inline double quantile(std::vector<double> v, double p) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline Stats stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    s.median = quantile(v, 0.5);
    s.iqr = quantile(v, 0.75) - quantile(v, 0.25);
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    return s;
}

struct ReplaySummary {
    std::size_t frames = 0;
    std::size_t timed_frames = 0;
    Stats err_total;
    Stats solve_ms;  // single-arm retargeting, both arms pooled
    Stats filter_ms;
    Stats frame_ms;
    std::size_t collision_frames = 0;
    std::size_t desired_collision_frames = 0;
    std::size_t held_frames = 0;
    std::size_t filter_held_frames = 0;
    std::size_t filter_active_frames = 0;
    std::size_t clamped_frames = 0;
    std::size_t degenerate_frames = 0;
    std::size_t gimbal_frames = 0;
    std::size_t branch_switches = 0;

    double collision_fraction() const {
        return frames ? static_cast<double>(collision_frames) / static_cast<double>(frames) : 0.0;
    }
    double desired_collision_fraction() const {
        return frames ? static_cast<double>(desired_collision_frames) / static_cast<double>(frames) : 0.0;
    }
};

inline constexpr std::size_t kDefaultWarmup = 100;

/// Aggregates from per-frame rows; held frames carry no alignment error. Timing statistics skip the first
/// `warmup` frames (all frames are used if there are no more than that).
inline ReplaySummary summarize(const std::vector<FrameRow>& rows, std::size_t warmup = kDefaultWarmup) {
    ReplaySummary s;
    s.frames = rows.size();
    std::vector<double> err, solve, filt, frame;
    const std::size_t first_timed = rows.size() > warmup ? warmup : 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const FrameRow& r = rows[i];
        if (!std::isnan(r.err_total)) err.push_back(r.err_total);
        if (i >= first_timed) {
            solve.push_back(r.solve_ms_left);
            solve.push_back(r.solve_ms_right);
            filt.push_back(r.filter_ms);
            frame.push_back(r.frame_ms);
        }
        s.collision_frames += r.collision;
        s.desired_collision_frames += r.desired_collision;
        s.held_frames += r.status == "held";
        s.filter_held_frames += r.filter_status == "held";
        s.filter_active_frames += r.filter_active;
        s.clamped_frames += r.clamped;
        s.degenerate_frames += r.degenerate;
        s.gimbal_frames += r.gimbal;
        s.branch_switches += r.branch_switch;
    }
    s.timed_frames = frame.size();
    s.err_total = stats(err);
    s.solve_ms = stats(solve);
    s.filter_ms = stats(filt);
    s.frame_ms = stats(frame);
    return s;
}

struct ReplayOptions {
    bool filter = false;
    FilterParams params;
    SyncOptions sync;
    /// Joint jump (rad) that counts as a branch switch when no flag explains it.
    double branch_jump = 0.5;
};

struct ReplayReport {
    bool filter = false;
    std::vector<FrameRow> rows;

    ReplaySummary summary(std::size_t warmup = kDefaultWarmup) const { return summarize(rows, warmup); }
};

inline ReplayReport run_replay(const BimanualModel& m, const KeypointTrajectory& traj, const ReplayOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
    if (opt.filter) opt.params.validate();

    ReplayReport report;
    report.filter = opt.filter;
    report.rows.reserve(traj.size());
    BimanualPose q{clamp_to_limits(m.left, JointVector{}), clamp_to_limits(m.right, JointVector{})};
    bool prev_flagged = true;

    for (std::size_t i = 0; i < traj.size(); ++i) {
        FrameRow row;
        row.index = static_cast<int>(i);
        row.t = traj.records[i].raw.t;
        const auto frame_start = clock::now();

        BimanualInput in;
        try {
            in = body_input(traj, i, opt.sync);
        } catch (const DegenerateError&) {
            row.status = "held";
            row.degenerate = true;
            row.q_left = q.left;
            row.q_right = q.right;
            row.min_distance = min_distance(make_capsules(m, bimanual_keypoints(m, q)));
            row.collision = row.min_distance < 0.0;
            row.desired_collision = row.collision;
            row.filter_status = opt.filter ? "held" : "off";
            row.err_total = std::numeric_limits<double>::quiet_NaN();
            row.frame_ms = ms(clock::now() - frame_start);
            report.rows.push_back(row);
            prev_flagged = true;
            continue;
        }

        const RetargetResult rl = sew_mimic(m.left, q.left, in.left);
        const RetargetResult rr = sew_mimic(m.right, q.right, in.right);
        row.solve_ms_left = 1e3 * rl.solve_seconds;
        row.solve_ms_right = 1e3 * rr.solve_seconds;
        const BimanualPose q_des{rl.q, rr.q};
        RetargetFlags fl = rl.flags;
        RetargetFlags fr = rr.flags;

        BimanualPose out = q_des;
        const CapsuleSet des_caps = make_capsules(m, bimanual_keypoints(m, q_des));
        if (opt.filter) {
            const auto f0 = clock::now();
            const FilterResult f = safety_filter(m, q, q_des, opt.params);
            row.filter_ms = ms(clock::now() - f0);
            out = f.q;
            row.filter_status = to_string(f.status);
            row.filter_active = f.active || f.status == FilterStatus::held;
            if (f.status == FilterStatus::safe && f.active) {
                fl = f.flags_left;
                fr = f.flags_right;
            }
            row.min_distance = f.min_distance;
            row.left = problem_costs(m.left, out.left, in.left);
            row.right = problem_costs(m.right, out.right, in.right);
        } else {
            row.min_distance = min_distance(des_caps);
            row.left = rl.costs;
            row.right = rr.costs;
        }
        row.frame_ms = ms(clock::now() - frame_start);
        row.desired_collision = min_distance(des_caps) < 0.0;
        row.collision = row.min_distance < 0.0;
        row.err_total = row.left.total() + row.right.total();
        row.clamped = fl.any_clamped() || fr.any_clamped();
        row.degenerate = fl.degenerate_upper || fl.degenerate_lower || fl.degenerate_wrist || fr.degenerate_upper ||
                         fr.degenerate_lower || fr.degenerate_wrist;
        row.gimbal = fl.gimbal || fr.gimbal;

        const bool flagged = row.clamped || row.degenerate || row.gimbal || row.filter_active;
        double jump = 0.0;
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            jump = std::max({jump, std::abs(out.left[j] - q.left[j]), std::abs(out.right[j] - q.right[j])});
        }
        row.branch_switch = i > 0 && !flagged && !prev_flagged && jump > opt.branch_jump;
        prev_flagged = flagged;

        q = out;
        row.q_left = q.left;
        row.q_right = q.right;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace sewmimic
