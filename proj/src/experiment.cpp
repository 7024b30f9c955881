#include "dynloc/experiment.hpp"

#include <chrono>
#include <exception>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "dynloc/scene_io.hpp"

namespace dynloc {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (trials < 1) throw ParameterError("trials must be >= 1");
    if (k < 4) throw ParameterError("k must be >= 4");
    if (k_prime < 3 || k_prime > k) throw ParameterError("k_prime must lie in [3, k]");
    if (n_values.empty() || m_values.empty()) throw ParameterError("n and m lists must not be empty");
    for (int n : n_values) {
        if (n < 2) throw ParameterError("grid resolution must be >= 2");
    }
    for (int m : m_values) {
        if (m < 0) throw ParameterError("obstacle count must be >= 0");
    }
    if (!(success_pos_tol > 0.0) || !(success_theta_tol > 0.0)) throw ParameterError("success tolerances must be > 0");
    if (epsilon && !(*epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if ((delta_pos && *delta_pos < 0.0) || (delta_theta && *delta_theta < 0.0)) throw ParameterError("delta must be >= 0");
    if (!(obstacle_size.min_fraction > 0.0) || obstacle_size.max_fraction < obstacle_size.min_fraction) {
        throw ParameterError("obstacle size range must satisfy 0 < min <= max");
    }
    if (clearance_diagonals < 0.0 || eps_meas < 0.0 || slack_extra < 0.0 || slope_bound < 0.0) {
        throw ParameterError("clearance, eps_meas, slack_extra and slope_bound must be >= 0");
    }
    if (workers < 0) throw ParameterError("workers must be >= 0");
    if (scene.is_random() && (scene.random.vertices < 3 || scene.random.radius <= 0.0 || scene.random.jitter < 0.0 ||
                              scene.random.jitter >= 1.0)) {
        throw ParameterError("invalid random scene parameters");
    }
}

namespace {

std::vector<int> int_list(const json& j, const std::string& key) {
    if (j.is_number_integer()) return {j.get<int>()};
    if (!j.is_array()) throw FormatError("field " + key + ": expected an integer or a list of integers");
    std::vector<int> out;
    for (const json& v : j) {
        if (!v.is_number_integer()) throw FormatError("field " + key + ": expected integers");
        out.push_back(v.get<int>());
    }
    return out;
}

template <class T>
T typed(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw FormatError("field " + key + ": wrong type");
    }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("config: expected a JSON object");

    ExperimentConfig cfg;
    for (const auto& [key, v] : doc.items()) {
        if (key == "scene") {
            if (v.is_string()) {
                cfg.scene.name = v.get<std::string>();
            } else if (v.is_object() && v.contains("random")) {
                cfg.scene.name = "random";
                const json& r = v["random"];
                cfg.scene.random.vertices = typed<int>(r.value("vertices", json(cfg.scene.random.vertices)), "scene.random.vertices");
                cfg.scene.random.radius = typed<double>(r.value("radius", json(cfg.scene.random.radius)), "scene.random.radius");
                cfg.scene.random.jitter = typed<double>(r.value("jitter", json(cfg.scene.random.jitter)), "scene.random.jitter");
            } else {
                throw FormatError("field scene: expected a name, a path or {\"random\": {...}}");
            }
        } else if (key == "m") {
            cfg.m_values = int_list(v, key);
        } else if (key == "n") {
            cfg.n_values = int_list(v, key);
        } else if (key == "k") {
            cfg.k = typed<int>(v, key);
        } else if (key == "k_prime") {
            cfg.k_prime = typed<int>(v, key);
        } else if (key == "trials") {
            cfg.trials = typed<int>(v, key);
        } else if (key == "seed") {
            cfg.seed = typed<std::uint64_t>(v, key);
        } else if (key == "success_pos_tol") {
            cfg.success_pos_tol = typed<double>(v, key);
        } else if (key == "success_theta_tol") {
            cfg.success_theta_tol = typed<double>(v, key);
        } else if (key == "epsilon") {
            cfg.epsilon = typed<double>(v, key);
        } else if (key == "delta_pos") {
            cfg.delta_pos = typed<double>(v, key);
        } else if (key == "delta_theta") {
            cfg.delta_theta = typed<double>(v, key);
        } else if (key == "obstacle_size") {
            const auto range = typed<std::vector<double>>(v, key);
            if (range.size() != 2) throw FormatError("field obstacle_size: expected [min, max]");
            cfg.obstacle_size = {range[0], range[1]};
        } else if (key == "clearance_diagonals") {
            cfg.clearance_diagonals = typed<double>(v, key);
        } else if (key == "eps_meas") {
            cfg.eps_meas = typed<double>(v, key);
        } else if (key == "slack_extra") {
            cfg.slack_extra = typed<double>(v, key);
        } else if (key == "slope_bound") {
            cfg.slope_bound = typed<double>(v, key);
        } else if (key == "workers") {
            cfg.workers = typed<int>(v, key);
        } else if (key == "record_timings") {
            cfg.record_timings = typed<bool>(v, key);
        } else {
            throw FormatError("config: unknown field " + key);
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

const char* to_string(Method m) { return m == Method::Robust ? "robust" : "baseline"; }

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial_index) {
    return mix_seed(cfg.seed, static_cast<std::uint64_t>(trial_index));
}

std::string scene_id(const SceneSource& s) {
    if (builtin_scene(s.name)) return s.name;
    return std::filesystem::path(s.name).stem().string();
}

// Fills success and the errors of the candidate closest to q_star, measured in
// units of the success tolerances.
void score(TrialRecord& rec, const LocalizationResult& result, const Pose& q_star, const ExperimentConfig& cfg) {
    const double pos_tol = cfg.success_pos_tol * result.grid.xy_diagonal();
    const double theta_tol = cfg.success_theta_tol * result.grid.cell_dtheta;
    rec.candidates = static_cast<int>(result.candidates.size());
    double best = std::numeric_limits<double>::infinity();
    for (const CandidatePose& c : result.candidates) {
        const double pe = distance(c.pose.position, q_star.position);
        const double te = angle_distance(c.pose.theta, q_star.theta);
        const double scaled = std::max(pe / pos_tol, te / theta_tol);
        if (scaled < best) {
            best = scaled;
            rec.pos_error = pe;
            rec.theta_error = te;
        }
    }
    rec.success = best <= 1.0;
}

}  // namespace

Scene trial_scene(const ExperimentConfig& cfg, int trial_index, int m) {
    const std::uint64_t ts = trial_seed(cfg, trial_index);
    Scene scene = cfg.scene.is_random()
                      ? Scene{random_polygon(mix_seed(ts, 1), cfg.scene.random.vertices, cfg.scene.random.radius,
                                             cfg.scene.random.jitter),
                              {}}
                      : resolve_scene(cfg.scene.name, mix_seed(ts, 1));
    for (Obstacle& o : random_obstacles(mix_seed(ts, 2), scene.workspace, m, cfg.obstacle_size)) {
        scene.obstacles.push_back(std::move(o));
    }
    return scene;
}

TrialOutcome simulate_trial(const ExperimentConfig& cfg, int trial_index, int n, int m) {
    TrialOutcome out;
    TrialRecord base;
    base.trial = trial_index;
    base.seed = trial_seed(cfg, trial_index);
    base.scene_id = scene_id(cfg.scene);
    base.n = n;
    base.m = m;
    base.k = cfg.k;
    base.k_prime = cfg.k_prime;
    out.robust = base;
    out.baseline = base;
    out.baseline.method = Method::Baseline;

    TrialSetup setup;
    GridSpec spec;
    try {
        Scene scene = trial_scene(cfg, trial_index, m);
        spec = make_spec(aabb(scene.workspace), n);
        const Pose q_star = sample_free_pose(mix_seed(base.seed, 3), scene, 0.0,
                                             cfg.clearance_diagonals * spec.xy_diagonal());
        setup = make_trial(scene, q_star, cfg.k, 0.0, cfg.eps_meas);
    } catch (const SimulationError& e) {
        for (TrialRecord* r : {&out.robust, &out.baseline}) {
            r->skipped = true;
            r->skip_reason = e.what();
        }
        return out;
    }

    const Polygon& w = setup.scene.workspace;
    const PreimageParams prep{n, cfg.slack_extra, cfg.slope_bound};
    const auto start = Clock::now();
    const std::vector<VoxelMask> masks = build_preimages(w, setup.measurements, spec, prep);
    const double preimage_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

    FusionParams fp;
    fp.epsilon = cfg.epsilon;
    fp.delta_pos = cfg.delta_pos;
    fp.delta_theta = cfg.delta_theta;
    fp.k_prime = cfg.k_prime;
    LocalizationResult robust = localize_masks(w, setup.measurements, masks, fp, prep);
    fp.k_prime = cfg.k;
    LocalizationResult baseline = localize_masks(w, setup.measurements, masks, fp, prep);

    for (auto* pair : {&robust, &baseline}) {
        pair->timings.preimage_ms = preimage_ms;
        pair->timings.total_ms = preimage_ms + pair->timings.fusion_ms;
    }
    out.robust.sparsity = out.baseline.sparsity = setup.sparsity;
    out.robust.runtime = robust.timings;
    out.baseline.runtime = baseline.timings;
    score(out.robust, robust, setup.ground_truth, cfg);
    score(out.baseline, baseline, setup.ground_truth, cfg);

    out.setup = std::move(setup);
    out.robust_result = std::move(robust);
    out.baseline_result = std::move(baseline);
    return out;
}

std::pair<TrialRecord, TrialRecord> run_trial(const ExperimentConfig& cfg, int trial_index, int n, int m) {
    TrialOutcome o = simulate_trial(cfg, trial_index, n, m);
    return {std::move(o.robust), std::move(o.baseline)};
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::function<void(const TrialOutcome&)>& inspect) {
    cfg.validate();

    struct Job {
        int n;
        int m;
        int trial;
    };
    std::vector<Job> jobs;
    for (int n : cfg.n_values) {
        for (int m : cfg.m_values) {
            for (int t = 0; t < cfg.trials; ++t) jobs.push_back({n, m, t});
        }
    }

    std::vector<TrialOutcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    const int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
    const int count = static_cast<int>(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int i = 0; i < count; ++i) {
        try {
            outcomes[i] = simulate_trial(cfg, jobs[i].trial, jobs[i].n, jobs[i].m);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentReport report;
    for (const TrialOutcome& o : outcomes) {
        if (inspect) inspect(o);
        report.records.push_back(o.robust);
        report.records.push_back(o.baseline);
    }
    report.aggregate = aggregate(report.records);
    return report;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records) {
    std::vector<AggregateRow> rows;
    std::map<std::tuple<int, int, int>, std::size_t> index;
    struct Sums {
        double pos{0.0}, theta{0.0};
        int with_error{0};
        double sparsity{0.0}, candidates{0.0};
    };
    std::vector<Sums> sums;
    for (const TrialRecord& r : records) {
        const auto key = std::tuple(r.n, r.m, static_cast<int>(r.method));
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, rows.size()).first;
            AggregateRow row;
            row.method = r.method;
            row.n = r.n;
            row.m = r.m;
            rows.push_back(row);
            sums.emplace_back();
        }
        AggregateRow& row = rows[it->second];
        Sums& s = sums[it->second];
        ++row.trials;
        if (r.skipped) {
            ++row.skipped;
            continue;
        }
        if (r.success) ++row.successes;
        if (r.pos_error && r.theta_error) {
            s.pos += *r.pos_error;
            s.theta += *r.theta_error;
            ++s.with_error;
        }
        s.sparsity += r.sparsity;
        s.candidates += r.candidates;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        AggregateRow& row = rows[i];
        const int evaluated = row.trials - row.skipped;
        if (evaluated > 0) {
            row.success_rate = 100.0 * row.successes / evaluated;
            row.mean_sparsity = sums[i].sparsity / evaluated;
            row.mean_candidates = sums[i].candidates / evaluated;
        }
        if (sums[i].with_error > 0) {
            row.mean_pos_error = sums[i].pos / sums[i].with_error;
            row.mean_theta_error = sums[i].theta / sums[i].with_error;
        }
    }
    return rows;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

}  // namespace

std::string trials_csv(const std::vector<TrialRecord>& records, bool timings) {
    std::string out(kTrialCsvHeader);
    out += '\n';
    for (const TrialRecord& r : records) {
        const std::string success = r.skipped ? "skipped" : (r.success ? "1" : "0");
        std::string times = ",,";
        if (timings && !r.skipped) {
            times = fmt::format("{:.3f},{:.3f},{:.3f}", r.runtime.preimage_ms, r.runtime.fusion_ms, r.runtime.total_ms);
        }
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.trial, r.seed, to_string(r.method), r.n, r.m,
                           r.k, r.k_prime, r.sparsity, success, opt(r.pos_error), opt(r.theta_error), r.candidates,
                           times);
    }
    return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out =
        "method,n,m,trials,skipped,successes,success_rate,mean_pos_error,mean_theta_error,mean_sparsity,mean_candidates\n";
    for (const AggregateRow& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{:.2f},{},{},{:.3f},{:.3f}\n", to_string(r.method), r.n, r.m, r.trials,
                           r.skipped, r.successes, r.success_rate, opt(r.mean_pos_error), opt(r.mean_theta_error),
                           r.mean_sparsity, r.mean_candidates);
    }
    return out;
}

}  // namespace dynloc
