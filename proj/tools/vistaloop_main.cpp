// vistaloop: procedural multiview driving-scene generation with a closed
// generation-evaluation-regeneration loop.
//
// Subcommands:
//   run       full closed loop; writes frames, audit.json, report.json, metrics.json
//   render    generator only; writes frames and instance-id buffers
//   evaluate  evaluator over an existing frame directory; writes report.json
//   metrics   metrics over an existing frame directory; writes metrics.json
//
// Exit codes: 0 pass, 1 input error, 2 budget exhausted.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vistaloop/vistaloop.hpp"

namespace fs = std::filesystem;
using namespace vistaloop;

namespace {

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir;
    uint64_t seed = 42;
    double lambda = 0.6;
    double gamma_g = 0.8;
    double gamma_o = 0.7;
    double alpha = 2.0;
    int max_iters = 5;
    int feather = 2;
    bool no_faults = false;
    bool export_masks = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out = true) {
    cmd->add_option("--scenario", o.scenario_path, "scenario JSON file")->required();
    auto* out = cmd->add_option("--out", o.out_dir, "output directory");
    if (needs_out) out->required();
    cmd->add_option("--seed", o.seed, "generator seed");
    cmd->add_option("--lambda", o.lambda, "Eq-style semantic/clarity blend in (0,1)");
    cmd->add_option("--gamma-g", o.gamma_g, "macro threshold in (0,1)");
    cmd->add_option("--gamma-o", o.gamma_o, "object threshold in (0,1)");
    cmd->add_option("--alpha", o.alpha, "emphasis multiplier > 1");
    cmd->add_option("--max-iters", o.max_iters, "iteration budget")->check(CLI::Range(1, 32));
    cmd->add_option("--feather", o.feather, "composite feather width in px")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--no-faults", o.no_faults, "ignore the scenario fault plan");
    cmd->add_flag("--export-masks", o.export_masks, "write refinement masks as PGM");
}

LoopConfig to_config(const CommonOpts& o) {
    LoopConfig c;
    c.seed = o.seed;
    c.lambda = o.lambda;
    c.gamma_g = o.gamma_g;
    c.gamma_o = o.gamma_o;
    c.alpha_emphasis = o.alpha;
    c.max_iterations = o.max_iters;
    c.feather_px = o.feather;
    c.apply_faults = !o.no_faults;
    c.check();
    return c;
}

Scenario load_scenario(const CommonOpts& o) {
    Scenario s = parse_scenario(read_file(o.scenario_path));
    load_references(s, fs::path(o.scenario_path).parent_path().string());
    return s;
}

std::string frame_name(int v, int t) {
    return "view" + std::to_string(v) + "_frame" + std::to_string(t);
}

void write_frames(const MultiviewVideo& video, const std::string& dir) {
    fs::create_directories(dir);
    for (int v = 0; v < video.views; ++v)
        for (int t = 0; t < video.num_frames; ++t) {
            write_file(dir + "/" + frame_name(v, t) + ".ppm", encode_ppm(video.at(v, t).pixels));
            write_file(dir + "/" + frame_name(v, t) + "_ids.pgm",
                       encode_pgm16(video.at(v, t).instance_ids));
        }
}

MultiviewVideo read_frames(const Scenario& s, const std::string& dir, bool need_ids) {
    MultiviewVideo video;
    video.views = s.num_views();
    video.num_frames = s.num_frames;
    video.frames.resize(static_cast<size_t>(video.views) * video.num_frames);
    for (int v = 0; v < video.views; ++v)
        for (int t = 0; t < video.num_frames; ++t) {
            Frame& f = video.at(v, t);
            f.view = v;
            f.frame_index = t;
            f.pixels = decode_ppm(read_file(dir + "/" + frame_name(v, t) + ".ppm"));
            const std::string ids_path = dir + "/" + frame_name(v, t) + "_ids.pgm";
            if (fs::exists(ids_path))
                f.instance_ids = decode_pgm16(read_file(ids_path));
            else if (need_ids)
                throw std::runtime_error("missing instance-id buffer: " + ids_path);
            else
                f.instance_ids = IdBuffer(f.pixels.width(), f.pixels.height());
        }
    return video;
}

void export_masks(const Scenario& s, const std::string& dir) {
    for (const auto& spec : s.objects) {
        const MaskSequence seq = make_masks(spec, s.rig, s.num_frames);
        for (const auto& m : seq.frames) {
            std::vector<uint8_t> bytes(m.mask.size());
            for (size_t i = 0; i < m.mask.size(); ++i) bytes[i] = m.mask[i] ? 255 : 0;
            write_file(dir + "/mask_obj" + std::to_string(spec.index) + "_" +
                           frame_name(m.view, m.frame) + ".pgm",
                       encode_pgm8(bytes, m.width, m.height));
        }
    }
}

int cmd_run(const CommonOpts& o) {
    const Scenario s = load_scenario(o);
    const LoopConfig config = to_config(o);
    const LoopResult result = run_closed_loop(s, config);

    fs::create_directories(o.out_dir);
    write_frames(result.video, o.out_dir);
    write_file(o.out_dir + "/audit.json", dump_deterministic(audit_to_json(result.log, config)));
    const AssessmentReport& final_report = result.log.iterations.back().report;
    write_file(o.out_dir + "/report.json",
               dump_deterministic(report_to_json(final_report, config.gamma_g, config.gamma_o)));
    const ConditionSet conditions = build_conditions(s);
    write_file(o.out_dir + "/metrics.json",
               dump_deterministic(metrics_to_json(compute_metrics(result.video, s, conditions))));
    if (o.export_masks) export_masks(s, o.out_dir);

    std::cout << (result.log.status == LoopStatus::Pass ? "pass" : "budget_exhausted") << " after "
              << result.log.iterations.size() << " iteration(s)\n";
    return result.log.status == LoopStatus::Pass ? 0 : 2;
}

int cmd_render(const CommonOpts& o) {
    const Scenario s = load_scenario(o);
    to_config(o);  // validate flags
    const ConditionSet conditions = build_conditions(s);
    const MultiviewVideo video =
        render_scene(conditions, s.rig, s.num_frames, o.seed,
                     o.no_faults ? std::vector<FaultSpec>{} : s.fault_plan, 1);
    write_frames(video, o.out_dir);
    if (o.export_masks) export_masks(s, o.out_dir);
    std::cout << "rendered " << video.views << "x" << video.num_frames << " frames\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& frames_dir) {
    const Scenario s = load_scenario(o);
    const LoopConfig config = to_config(o);
    const ConditionSet conditions = build_conditions(s);
    const MultiviewVideo video = read_frames(s, frames_dir, false);
    const AssessmentReport report = evaluate_video(video, conditions, s.rig, config.lambda);
    const std::string out = o.out_dir.empty() ? frames_dir : o.out_dir;
    fs::create_directories(out);
    write_file(out + "/report.json",
               dump_deterministic(report_to_json(report, config.gamma_g, config.gamma_o)));
    std::cout << "s_macro " << report.s_macro << "\n";
    return 0;
}

int cmd_metrics(const CommonOpts& o, const std::string& frames_dir) {
    const Scenario s = load_scenario(o);
    to_config(o);
    const ConditionSet conditions = build_conditions(s);
    const MultiviewVideo video = read_frames(s, frames_dir, true);
    const MetricsReport m = compute_metrics(video, s, conditions);
    const std::string out = o.out_dir.empty() ? frames_dir : o.out_dir;
    fs::create_directories(out);
    write_file(out + "/metrics.json", dump_deterministic(metrics_to_json(m)));
    std::cout << "layout_iou_mean " << m.layout_iou_mean << " ap_at_50 " << m.ap_at_50 << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"procedural multiview scene generation with closed-loop auditing"};
    app.require_subcommand(1);

    CommonOpts run_opts, render_opts, eval_opts, metrics_opts;
    std::string eval_frames, metrics_frames;

    auto* run = app.add_subcommand("run", "full closed loop");
    add_common(run, run_opts);
    auto* render = app.add_subcommand("render", "generator only");
    add_common(render, render_opts);
    auto* evaluate = app.add_subcommand("evaluate", "evaluator over existing frames");
    add_common(evaluate, eval_opts, false);
    evaluate->add_option("--frames", eval_frames, "directory of rendered frames")->required();
    auto* metrics = app.add_subcommand("metrics", "metrics over an existing run directory");
    add_common(metrics, metrics_opts, false);
    metrics->add_option("--frames", metrics_frames, "directory of rendered frames")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (render->parsed()) return cmd_render(render_opts);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts, eval_frames);
        if (metrics->parsed()) return cmd_metrics(metrics_opts, metrics_frames);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
