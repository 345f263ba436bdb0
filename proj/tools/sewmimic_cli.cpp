// sewmimic: retarget, replay, bench, synth and oracle subcommands.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "sewmimic.hpp"

using namespace sewmimic;
using wire::json;

namespace {

struct Common {
    std::string model_left = std::string(SEWMIMIC_DATA_DIR) + "/models/perpendicular_left.json";
    std::string model_right = std::string(SEWMIMIC_DATA_DIR) + "/models/perpendicular_right.json";
    std::string filter = "off";
    std::string params;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 1;

    BimanualModel models() const { return {load_model(model_left), load_model(model_right)}; }
    bool filter_on() const { return filter == "on"; }
    FilterParams filter_params() const { return params.empty() ? FilterParams{} : load_filter_params(params); }
    ReportFormat report_format() const { return parse_report_format(format); }
};

void add_common(CLI::App* app, Common& c, bool with_filter = true) {
    app->add_option("--model-left", c.model_left, "Left arm description")->check(CLI::ExistingFile);
    app->add_option("--model-right", c.model_right, "Right arm description")->check(CLI::ExistingFile);
    if (with_filter) {
        app->add_option("--filter", c.filter, "Safety filter")->check(CLI::IsMember({"on", "off"}));
        app->add_option("--params", c.params, "Filter parameter file (JSON)")->check(CLI::ExistingFile);
    }
    app->add_option("--out", c.out, "Output path (stdout when omitted)");
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
    app->add_option("--seed", c.seed, "Random seed");
}

/// Output stream for --out, falling back to stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot write '" + path + "'");
        }
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }
    bool is_stdout() const { return !file_; }
    void finish() {
        get().flush();
        if (!get()) throw std::runtime_error("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

json joints_json(const JointVector& q) {
    json a = json::array();
    for (std::size_t i = 0; i < kNumJoints; ++i) a.push_back(q[i]);
    return a;
}

json costs_json(const ProblemCosts& c) {
    return {{"upper", c.upper}, {"lower", c.lower}, {"wrist", c.wrist}, {"total", c.total()}};
}

int cmd_retarget(const Common& c, const std::string& input, const std::string& inline_frame, std::size_t index,
                 const std::string& body_frame) {
    const BimanualModel m = c.models();
    KeypointTrajectory traj;
    if (!inline_frame.empty()) {
        traj.frame = body_frame == "body" ? TrajectoryFrame::body : TrajectoryFrame::stream;
        json j;
        try {
            j = json::parse(inline_frame);
        } catch (const json::exception& e) {
            throw ParseError(std::string("--frame: ") + e.what());
        }
        if (!j.contains("t")) j["t"] = 0.0;
        traj.records.push_back({parse_frame(j, traj.frame), false, {}});
    } else {
        traj = load_trajectory(input);
    }
    if (index >= traj.size()) throw ParseError("--index " + std::to_string(index) + " is past the last frame");

    const BimanualInput in = body_input(traj, index);
    const BimanualPose q0{clamp_to_limits(m.left, JointVector{}), clamp_to_limits(m.right, JointVector{})};
    const RetargetResult rl = sew_mimic(m.left, q0.left, in.left);
    const RetargetResult rr = sew_mimic(m.right, q0.right, in.right);
    BimanualPose q{rl.q, rr.q};
    std::string status = "off";
    if (c.filter_on()) {
        const FilterResult f = safety_filter(m, q0, q, c.filter_params());
        q = f.q;
        status = to_string(f.status);
    }
    const ProblemCosts el = problem_costs(m.left, q.left, in.left);
    const ProblemCosts er = problem_costs(m.right, q.right, in.right);
    const double dmin = min_distance(make_capsules(m, bimanual_keypoints(m, q)));

    Output out(c.out);
    if (c.report_format() == ReportFormat::jsonl) {
        out.get() << json{{"t", traj.records[index].raw.t},
                          {"q_left", joints_json(q.left)},
                          {"q_right", joints_json(q.right)},
                          {"errors", {{"left", costs_json(el)}, {"right", costs_json(er)}}},
                          {"clamped", rl.flags.any_clamped() || rr.flags.any_clamped()},
                          {"degenerate", rl.flags.any_degenerate() || rr.flags.any_degenerate()},
                          {"filter_status", status},
                          {"min_distance", dmin}}
                         .dump()
                  << '\n';
    } else {
        out.get() << "t";
        for (int i = 1; i <= kNumJoints; ++i) out.get() << ",q_left_" << i;
        for (int i = 1; i <= kNumJoints; ++i) out.get() << ",q_right_" << i;
        out.get() << ",err_total,min_distance,filter_status\n";
        out.get() << detail::format_real(traj.records[index].raw.t);
        for (std::size_t i = 0; i < kNumJoints; ++i) out.get() << ',' << detail::format_real(q.left[i]);
        for (std::size_t i = 0; i < kNumJoints; ++i) out.get() << ',' << detail::format_real(q.right[i]);
        out.get() << ',' << detail::format_real(el.total() + er.total()) << ',' << detail::format_real(dmin) << ','
                  << status << '\n';
    }
    out.finish();
    return 0;
}

void print_summary(const ReplayReport& r, bool to_stderr) {
    (to_stderr ? std::cerr : std::cout) << summary_text(r.summary(), r.filter);
}

int cmd_replay(const Common& c, const std::string& input) {
    ReplayOptions opt;
    opt.filter = c.filter_on();
    opt.params = c.filter_params();
    const ReplayReport r = run_replay(c.models(), load_trajectory(input), opt);
    Output out(c.out);
    write_report(out.get(), r, c.report_format());
    out.finish();
    print_summary(r, out.is_stdout());
    return 0;
}

int cmd_bench(const Common& c, std::size_t frames) {
    const BimanualModel m = c.models();
    ReplayOptions opt;
    opt.filter = c.filter_on();
    opt.params = c.filter_params();
    const ReplayReport r = run_replay(m, synth_fk_walk(m, frames + kDefaultWarmup, c.seed), opt);
    const ReplaySummary s = r.summary();
    if (!c.out.empty()) {
        Output out(c.out);
        write_report(out.get(), r, c.report_format());
        out.finish();
    }
    std::printf("single-arm solve: median %.4f ms, IQR %.4f ms, mean %.4f ms over %zu frames (after %zu warm-up)\n",
                s.solve_ms.median, s.solve_ms.iqr, s.solve_ms.mean, s.timed_frames, kDefaultWarmup);
    std::printf("median rate per arm: %.0f Hz\n", 1e3 / s.solve_ms.median);
    std::printf("median alignment error: %.3g\n", s.err_total.median);
    return 0;
}

int cmd_synth(const Common& c, const std::string& kind, const RollingPunchParams& rp, std::size_t frames) {
    if (c.format != "jsonl" && !c.format.empty()) throw ParseError("synth writes trajectories as jsonl only");
    KeypointTrajectory traj;
    if (kind == "rolling-punch") {
        traj = synth_rolling_punch(rp);
    } else {
        const BimanualModel m = c.models();
        traj = synth_fk_walk(m, frames, c.seed);
    }
    Output out(c.out);
    write_trajectory(out.get(), traj);
    out.finish();
    if (!out.is_stdout()) std::printf("wrote %zu frames to %s\n", traj.size(), c.out.c_str());
    return 0;
}

int cmd_oracle(const Common& c, const std::string& side, int instances, int starts, bool reachable) {
    const BimanualModel m = c.models();
    const RobotArmModel& arm = side == "left" ? m.left : m.right;
    std::mt19937_64 rng(c.seed);
    OracleOptions opt;
    opt.starts = starts;
    opt.seed = c.seed;
    Output out(c.out);
    const bool csv = c.report_format() == ReportFormat::csv;
    if (csv) out.get() << "instance,sew_cost,oracle_cost,gap,evaluations\n";
    double worst = -std::numeric_limits<double>::infinity();
    int beaten = 0;
    for (int k = 0; k < instances; ++k) {
        HumanInput in;
        if (reachable) {
            JointVector q;
            for (int i = 1; i <= kNumJoints; ++i) {
                q[static_cast<std::size_t>(i - 1)] = std::uniform_real_distribution<double>(arm.lower(i), arm.upper(i))(rng);
            }
            in = human_input_from_pose(arm, q);
        } else {
            in = random_human_input(arm, rng);
        }
        const double sew = sew_mimic(arm, clamp_to_limits(arm, JointVector{}), in).costs.total();
        const OracleResult o = oracle_solve(arm, in, opt);
        const double gap = sew - o.cost;
        worst = std::max(worst, gap);
        beaten += gap > 1e-6;
        if (csv) {
            out.get() << k << ',' << detail::format_real(sew) << ',' << detail::format_real(o.cost) << ','
                      << detail::format_real(gap) << ',' << o.evaluations << '\n';
        } else {
            out.get() << json{{"instance", k}, {"sew_cost", sew}, {"oracle_cost", o.cost}, {"gap", gap},
                              {"evaluations", o.evaluations}}
                             .dump()
                      << '\n';
        }
    }
    out.finish();
    (out.is_stdout() ? std::cerr : std::cout)
        << "instances " << instances << ", worst gap (sew - oracle) " << worst << ", oracle better by >1e-6 on "
        << beaten << '\n';
    return beaten == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form shoulder-elbow-wrist arm retargeting"};
    app.require_subcommand(1);
    Common common;

    std::string input;
    std::string inline_frame;
    std::string frame_kind = "stream";
    std::size_t index = 0;
    auto* retarget = app.add_subcommand("retarget", "Retarget a single frame");
    add_common(retarget, common);
    retarget->add_option("--input", input, "Trajectory file")->check(CLI::ExistingFile);
    retarget->add_option("--frame", inline_frame, "Frame as an inline JSON object");
    retarget->add_option("--frame-kind", frame_kind, "Coordinates of --frame")->check(CLI::IsMember({"stream", "body"}));
    retarget->add_option("--index", index, "Frame index within --input");

    auto* replay = app.add_subcommand("replay", "Replay a trajectory and write a report");
    add_common(replay, common);
    replay->add_option("--input", input, "Trajectory file")->required()->check(CLI::ExistingFile);

    std::size_t bench_frames = 10000;
    auto* bench = app.add_subcommand("bench", "Latency distribution on a reachable random walk");
    add_common(bench, common);
    bench->add_option("--frames", bench_frames, "Timed frames (a 100-frame warm-up is added)");

    std::string kind = "rolling-punch";
    RollingPunchParams rp;
    std::size_t synth_frames = 2000;
    auto* synth = app.add_subcommand("synth", "Write a synthetic trajectory");
    add_common(synth, common, false);
    synth->add_option("--kind", kind, "Motion")->check(CLI::IsMember({"rolling-punch", "fk-walk"}));
    synth->add_option("--duration", rp.duration, "Seconds (rolling punch)");
    synth->add_option("--rate", rp.rate, "Hz (rolling punch)");
    synth->add_option("--rotations", rp.rotations, "Full circles (rolling punch)");
    synth->add_option("--radius", rp.circle_radius, "Circle radius, m (rolling punch)");
    synth->add_option("--frames", synth_frames, "Frame count (fk-walk)");

    std::string side = "right";
    int instances = 20;
    int starts = 50;
    bool reachable = false;
    auto* oracle = app.add_subcommand("oracle", "Compare the closed form against a multi-start numerical search");
    add_common(oracle, common, false);
    oracle->add_option("--side", side, "Arm to audit")->check(CLI::IsMember({"left", "right"}));
    oracle->add_option("--instances", instances, "Random instances");
    oracle->add_option("--starts", starts, "Oracle starts per instance");
    oracle->add_flag("--reachable", reachable, "Generate inputs from in-limit robot poses");

    CLI11_PARSE(app, argc, argv);
    if (synth->parsed() && synth->count("--format") == 0) common.format = "jsonl";

    try {
        if (retarget->parsed()) {
            if (input.empty() == inline_frame.empty()) throw ParseError("retarget: give exactly one of --input or --frame");
            return cmd_retarget(common, input, inline_frame, index, frame_kind);
        }
        if (replay->parsed()) return cmd_replay(common, input);
        if (bench->parsed()) return cmd_bench(common, bench_frames);
        if (synth->parsed()) return cmd_synth(common, kind, rp, synth_frames);
        if (oracle->parsed()) return cmd_oracle(common, side, instances, starts, reachable);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
