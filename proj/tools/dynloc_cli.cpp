// dynloc command line: localize, simulate, experiment, render.
//
// Exit codes: 0 ok, 1 usage error, 2 input validation error, 3 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dynloc/experiment.hpp"
#include "dynloc/fusion.hpp"
#include "dynloc/scene_io.hpp"
#include "dynloc/svg.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

void print_candidates(const dynloc::LocalizationResult& r) {
    std::cout << "rank,x,y,theta,agreement,component_size\n";
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        std::cout << fmt::format("{},{:.6f},{:.6f},{:.6f},{},{}\n", i, c.pose.position.x, c.pose.position.y,
                                 c.pose.theta, c.agreement_count, c.component_size);
    }
}

struct Overrides {
    std::optional<double> epsilon;
    std::optional<double> delta_pos;
    std::optional<double> delta_theta;
    double slack_extra{0.0};
    double slope_bound{1.0};
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--epsilon", o.epsilon, "Agreement tolerance in meters (default: grid-derived)");
    cmd->add_option("--delta-pos", o.delta_pos, "Position uniqueness radius in meters");
    cmd->add_option("--delta-theta", o.delta_theta, "Heading uniqueness radius in radians");
    cmd->add_option("--slack-extra", o.slack_extra, "Extra preimage slack in meters")->check(CLI::NonNegativeNumber);
    cmd->add_option("--slope-bound", o.slope_bound, "Visibility filter slope bound")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace dynloc;

    CLI::App app{"Few-measurement localization robust to unknown obstacles"};
    app.require_subcommand(1);

    // localize
    std::string scene_source;
    std::string measurements_path;
    int n = 64;
    int k_prime = 6;
    bool baseline = false;
    std::uint64_t seed = 1;
    Overrides over;
    auto* localize_cmd = app.add_subcommand("localize", "Localize from a scene and a measurement file");
    localize_cmd->add_option("--scene", scene_source, "Builtin scene name or scene file")->required();
    localize_cmd->add_option("--measurements", measurements_path, "File of tx,ty,rot,d rows")->required();
    localize_cmd->add_option("-n,--n", n, "Grid resolution per axis")->check(CLI::Range(2, 1024));
    localize_cmd->add_option("--k-prime", k_prime, "Consensus threshold k'");
    localize_cmd->add_flag("--baseline", baseline, "Plain intersection of all preimages");
    localize_cmd->add_option("--seed", seed, "Seed for the random builtin scene");
    add_override_flags(localize_cmd, over);

    // simulate
    ExperimentConfig sim_cfg;
    sim_cfg.trials = 1;
    int sim_trial = 0;
    std::string svg_path;
    std::string save_scene_path;
    std::string save_measurements_path;
    int sim_m = 10;
    int sim_n = 64;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run one trial and optionally render it");
    simulate_cmd->add_option("--scene", sim_cfg.scene.name, "Builtin scene name, scene file or 'random'");
    simulate_cmd->add_option("-m,--m", sim_m, "Number of random obstacles")->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("-k,--k", sim_cfg.k, "Number of measurements");
    simulate_cmd->add_option("--k-prime", sim_cfg.k_prime, "Consensus threshold k'");
    simulate_cmd->add_option("-n,--n", sim_n, "Grid resolution per axis");
    simulate_cmd->add_option("--seed", sim_cfg.seed, "Base seed");
    simulate_cmd->add_option("--trial", sim_trial, "Trial index")->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--svg", svg_path, "Write an SVG rendering here");
    simulate_cmd->add_option("--save-scene", save_scene_path, "Write the trial scene (with obstacles) here");
    simulate_cmd->add_option("--save-measurements", save_measurements_path, "Write the measurements here");

    // experiment
    std::string config_path;
    std::string out_dir = ".";
    ExperimentConfig exp_cfg;
    std::vector<int> exp_m;
    std::vector<int> exp_n;
    std::optional<double> exp_eps;
    std::optional<double> exp_dpos;
    std::optional<double> exp_dtheta;
    std::optional<int> exp_trials, exp_k, exp_kp, exp_workers;
    std::optional<std::uint64_t> exp_seed;
    std::optional<std::string> exp_scene;
    bool exp_timings = false;
    auto* experiment_cmd = app.add_subcommand("experiment", "Run a seeded success-rate experiment");
    experiment_cmd->add_option("--config", config_path, "JSON config; flags override its fields");
    experiment_cmd->add_option("--out-dir", out_dir, "Directory for trials.csv and aggregate.csv");
    experiment_cmd->add_option("--scene", exp_scene, "Builtin scene name, scene file or 'random'");
    experiment_cmd->add_option("-m,--m", exp_m, "Obstacle counts");
    experiment_cmd->add_option("-n,--n", exp_n, "Grid resolutions");
    experiment_cmd->add_option("-k,--k", exp_k, "Number of measurements");
    experiment_cmd->add_option("--k-prime", exp_kp, "Consensus threshold k'");
    experiment_cmd->add_option("--trials", exp_trials, "Trials per (n, m)");
    experiment_cmd->add_option("--seed", exp_seed, "Base seed");
    experiment_cmd->add_option("--workers", exp_workers, "Parallel trials (0 = all cores)");
    experiment_cmd->add_option("--epsilon", exp_eps, "Agreement tolerance in meters");
    experiment_cmd->add_option("--delta-pos", exp_dpos, "Position uniqueness radius in meters");
    experiment_cmd->add_option("--delta-theta", exp_dtheta, "Heading uniqueness radius in radians");
    experiment_cmd->add_flag("--timings", exp_timings, "Write per-stage runtimes (breaks byte-identical reruns)");

    // render
    std::string render_out;
    auto* render_cmd = app.add_subcommand("render", "Render a scene to SVG");
    render_cmd->add_option("--scene", scene_source, "Builtin scene name or scene file")->required();
    render_cmd->add_option("--seed", seed, "Seed for the random builtin scene");
    render_cmd->add_option("-o,--out", render_out, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*localize_cmd) {
            const Scene scene = resolve_scene(scene_source, seed);
            const auto ms = load_measurements(measurements_path);
            FusionParams fp;
            fp.k_prime = k_prime;
            fp.epsilon = over.epsilon;
            fp.delta_pos = over.delta_pos;
            fp.delta_theta = over.delta_theta;
            const PreimageParams prep{n, over.slack_extra, over.slope_bound};
            const LocalizationResult r = baseline ? baseline_localize(scene.workspace, ms, n, prep, fp)
                                                  : localize(scene.workspace, ms, n, fp, prep);
            print_candidates(r);
        } else if (*simulate_cmd) {
            sim_cfg.m_values = {sim_m};
            sim_cfg.n_values = {sim_n};
            sim_cfg.validate();
            const TrialOutcome o = simulate_trial(sim_cfg, sim_trial, sim_n, sim_m);
            if (o.robust.skipped) {
                std::cerr << "trial skipped: " << o.robust.skip_reason << '\n';
                return kExitRuntime;
            }
            std::cout << fmt::format("ground_truth,{:.6f},{:.6f},{:.6f}\nsparsity,{}/{}\n",
                                     o.setup->ground_truth.position.x, o.setup->ground_truth.position.y,
                                     o.setup->ground_truth.theta, o.setup->sparsity, sim_cfg.k);
            for (const TrialRecord* r : {&o.robust, &o.baseline}) {
                std::cout << fmt::format("{},success={},candidates={}\n", to_string(r->method), r->success ? 1 : 0,
                                         r->candidates);
            }
            print_candidates(*o.robust_result);
            if (!svg_path.empty()) write_svg(svg_path, o.setup->scene, &*o.setup, &*o.robust_result);
            if (!save_scene_path.empty()) save_scene(o.setup->scene, save_scene_path);
            if (!save_measurements_path.empty()) {
                write_text_file(save_measurements_path, serialize_measurements(o.setup->measurements));
            }
        } else if (*experiment_cmd) {
            ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
            if (exp_scene) cfg.scene.name = *exp_scene;
            if (!exp_m.empty()) cfg.m_values = exp_m;
            if (!exp_n.empty()) cfg.n_values = exp_n;
            if (exp_k) cfg.k = *exp_k;
            if (exp_kp) cfg.k_prime = *exp_kp;
            if (exp_trials) cfg.trials = *exp_trials;
            if (exp_seed) cfg.seed = *exp_seed;
            if (exp_workers) cfg.workers = *exp_workers;
            if (exp_eps) cfg.epsilon = exp_eps;
            if (exp_dpos) cfg.delta_pos = exp_dpos;
            if (exp_dtheta) cfg.delta_theta = exp_dtheta;
            if (exp_timings) cfg.record_timings = true;
            if (!cfg.scene.is_random() && !builtin_scene(cfg.scene.name)) load_scene(cfg.scene.name);

            const ExperimentReport report = run_experiment(cfg);
            std::filesystem::create_directories(out_dir);
            write_text_file(std::filesystem::path(out_dir) / "trials.csv", trials_csv(report.records, cfg.record_timings));
            const std::string agg = aggregate_csv(report.aggregate);
            write_text_file(std::filesystem::path(out_dir) / "aggregate.csv", agg);
            std::cout << agg;
        } else if (*render_cmd) {
            write_svg(render_out, resolve_scene(scene_source, seed));
        }
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const SceneValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
