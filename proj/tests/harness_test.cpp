#include <cstdlib>
#include <filesystem>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "dynloc/experiment.hpp"
#include "dynloc/scene_io.hpp"
#include "dynloc/svg.hpp"
#include "test_support.hpp"

namespace dynloc {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dynloc_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::map<std::string, std::string>> parse_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::getline(ss, line);
    const auto header = split(line);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(ss, line)) {
        const auto cells = split(line);
        EXPECT_EQ(cells.size(), header.size()) << line;
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(row);
    }
    return rows;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.m_values = {0, 10};
    cfg.n_values = {32};
    cfg.trials = 4;
    cfg.seed = 123;
    return cfg;
}

TEST(SceneIo, BuiltinSquareRoom) {
    const Scene s = *builtin_scene("square-room");
    EXPECT_EQ(s.workspace, testing::square(0, 10));
    EXPECT_TRUE(s.obstacles.empty());
    EXPECT_FALSE(builtin_scene("no-such-scene").has_value());
}

TEST(SceneIo, BuiltinsAreValid) {
    for (const std::string& name : builtin_scene_names()) {
        const Scene s = *builtin_scene(name, 7);
        EXPECT_FALSE(validate(s.workspace).has_value()) << name;
    }
    EXPECT_EQ(builtin_scene("lab-lidar-like")->workspace.outer.size(), 40u);
    EXPECT_FALSE(builtin_scene("floor-plan-like")->workspace.holes.empty());
}

TEST(SceneIo, RoundTripIsBitExact) {
    const fs::path dir = temp_dir("roundtrip");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Scene s{random_polygon(seed, 17, 4.3, 0.45), {}};
        s.workspace.holes.push_back(testing::square_hole(-0.3, 0.3));
        s.obstacles = random_obstacles(seed, s.workspace, 6);
        const fs::path file = dir / ("scene" + std::to_string(seed) + ".json");
        save_scene(s, file);
        const Scene back = load_scene(file);
        EXPECT_EQ(back.workspace, s.workspace);
        ASSERT_EQ(back.obstacles.size(), s.obstacles.size());
        for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
            EXPECT_EQ(back.obstacles[i].shape, s.obstacles[i].shape);
            EXPECT_EQ(back.obstacles[i].trajectory.at(0), s.obstacles[i].trajectory.at(0));
        }
        EXPECT_EQ(serialize_scene(back), serialize_scene(s));
    }
}

TEST(SceneIo, BowtieSurfacesRingIndex) {
    const std::string bowtie = R"({"workspace": {"outer": [[0,0],[2,2],[2,0],[0,2]], "holes": []}, "obstacles": []})";
    try {
        parse_scene(bowtie);
        FAIL();
    } catch (const SceneValidationError& e) {
        EXPECT_EQ(e.where(), "workspace");
        EXPECT_EQ(e.violation().kind, ViolationKind::OuterNotSimple);
        EXPECT_EQ(e.violation().ring, 0u);
    }
    const std::string hole = R"({"workspace": {"outer": [[0,0],[10,0],[10,10],[0,10]],
        "holes": [[[4,4],[4,6],[6,6],[6,4]], [[1,1],[2,2],[2,1],[1,2]]]}})";
    try {
        parse_scene(hole);
        FAIL();
    } catch (const SceneValidationError& e) {
        EXPECT_EQ(e.violation().ring, 2u);
        EXPECT_NE(std::string(e.what()).find("ring 2"), std::string::npos) << e.what();
    }
}

TEST(SceneIo, MalformedInputNamesLineOrField) {
    try {
        parse_scene("{\n\"workspace\": {\n\"outer\": [[0,0],[1,0],[0,1]],\n}\n}");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
    try {
        parse_scene(R"({"workspace": {"outer": [[0,0],[1,0],[0,"x"]]}})");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("workspace.outer[2]"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_scene(R"({"obstacles": []})"), FormatError);
}

TEST(MeasurementIo, ParseAndErrors) {
    const auto ms = parse_measurements("# tx,ty,rot,d\n0,0,0,5\n\n0.5,-0.25,1.5707963267948966,3.25\n");
    ASSERT_EQ(ms.size(), 2u);
    EXPECT_EQ(ms[1].g.translation, (Point2{0.5, -0.25}));
    EXPECT_DOUBLE_EQ(ms[1].g.rotation, kPi / 2);
    EXPECT_DOUBLE_EQ(ms[1].d, 3.25);
    EXPECT_EQ(parse_measurements(serialize_measurements(ms)).size(), 2u);
    EXPECT_EQ(parse_measurements(serialize_measurements(ms))[1].d, ms[1].d);

    auto message = [](const std::string& text) {
        try {
            parse_measurements(text);
        } catch (const FormatError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("0,0,0,5\n1,2,3\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("0,0,abc,5\n").find("field rot"), std::string::npos);
    EXPECT_NE(message("0,0,0,-1\n").find("field d"), std::string::npos);
}

TEST(Config, ParseAllFields) {
    const ExperimentConfig cfg = parse_config(R"({
        "scene": {"random": {"vertices": 12, "radius": 4.0, "jitter": 0.3}},
        "m": [10, 30], "n": 48, "k": 8, "k_prime": 5, "trials": 7, "seed": 99,
        "success_pos_tol": 3, "success_theta_tol": 2.5, "epsilon": 0.4,
        "delta_pos": 0.3, "delta_theta": 0.2, "obstacle_size": [0.01, 0.02],
        "clearance_diagonals": 1.5, "eps_meas": 0.01, "slack_extra": 0.05,
        "slope_bound": 2, "workers": 3, "record_timings": true})");
    EXPECT_TRUE(cfg.scene.is_random());
    EXPECT_EQ(cfg.scene.random.vertices, 12);
    EXPECT_EQ(cfg.m_values, (std::vector<int>{10, 30}));
    EXPECT_EQ(cfg.n_values, (std::vector<int>{48}));
    EXPECT_EQ(cfg.k, 8);
    EXPECT_EQ(cfg.k_prime, 5);
    EXPECT_EQ(cfg.trials, 7);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_DOUBLE_EQ(*cfg.epsilon, 0.4);
    EXPECT_DOUBLE_EQ(cfg.obstacle_size.max_fraction, 0.02);
    EXPECT_TRUE(cfg.record_timings);
    EXPECT_NO_THROW(cfg.validate());

    EXPECT_EQ(parse_config(R"({"scene": "floor-plan-like"})").scene.name, "floor-plan-like");
    EXPECT_THROW(parse_config(R"({"trails": 3})"), FormatError);
    EXPECT_THROW(parse_config(R"({"k": "ten"})"), FormatError);
    EXPECT_THROW(parse_config(R"({"k_prime": 2})").validate(), ParameterError);
}

TEST(RunTrial, CleanSceneSucceeds) {
    ExperimentConfig cfg;
    cfg.m_values = {0};
    int baseline_ok = 0;
    for (int t = 0; t < 10; ++t) {
        const auto [robust, baseline] = run_trial(cfg, t, 64, 0);
        EXPECT_FALSE(robust.skipped);
        EXPECT_EQ(robust.sparsity, cfg.k);
        EXPECT_TRUE(robust.success) << t;
        baseline_ok += baseline.success ? 1 : 0;
    }
    EXPECT_GE(baseline_ok, 8);
}

TEST(RunTrial, DeterministicAndSeeded) {
    const ExperimentConfig cfg = small_config();
    const auto [a, b] = run_trial(cfg, 2, 32, 10);
    const auto [c, d] = run_trial(cfg, 2, 32, 10);
    EXPECT_EQ(a.seed, c.seed);
    EXPECT_EQ(a.pos_error, c.pos_error);
    EXPECT_EQ(b.candidates, d.candidates);
    EXPECT_EQ(trial_scene(cfg, 2, 10).workspace, trial_scene(cfg, 2, 10).workspace);
    EXPECT_NE(trial_scene(cfg, 2, 10).workspace, trial_scene(cfg, 3, 10).workspace);
}

TEST(RunTrial, GenerationFailureIsSkipped) {
    ExperimentConfig cfg;
    cfg.obstacle_size = {0.9, 1.0};
    const auto [robust, baseline] = run_trial(cfg, 0, 16, 1);
    EXPECT_TRUE(robust.skipped);
    EXPECT_TRUE(baseline.skipped);
    EXPECT_EQ(robust.skip_reason, "workspace-too-crowded");
    const std::string csv = trials_csv({robust, baseline}, false);
    EXPECT_NE(csv.find(",skipped,"), std::string::npos);
    const auto rows = aggregate({robust, baseline});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].skipped, 1);
    EXPECT_EQ(rows[0].successes, 0);
}

TEST(Experiment, CsvHeaderAndAggregateConsistency) {
    const ExperimentConfig cfg = small_config();
    const ExperimentReport r = run_experiment(cfg);
    const std::string csv = trials_csv(r.records, false);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kTrialCsvHeader);
    EXPECT_EQ(kTrialCsvHeader,
              "trial,seed,method,n,m,k,k_prime,sparsity,success,pos_error,theta_error,candidates,preimage_ms,fusion_ms,"
              "total_ms");
    ASSERT_EQ(r.records.size(), 2u * cfg.trials * cfg.m_values.size());

    // Recompute success rates from the CSV text alone.
    std::map<std::string, std::pair<int, int>> tally;
    for (const auto& row : parse_csv(csv)) {
        if (row.at("success") == "skipped") continue;
        auto& t = tally[row.at("method") + "/" + row.at("m")];
        t.first += row.at("success") == "1";
        ++t.second;
        EXPECT_TRUE(row.at("preimage_ms").empty());
    }
    const auto agg = parse_csv(aggregate_csv(r.aggregate));
    ASSERT_EQ(agg.size(), 4u);
    for (const auto& row : agg) {
        const auto& t = tally.at(row.at("method") + "/" + row.at("m"));
        EXPECT_NEAR(std::stod(row.at("success_rate")), 100.0 * t.first / t.second, 0.005);
        EXPECT_EQ(std::stoi(row.at("successes")), t.first);
    }
}

TEST(Experiment, SingleTrialAggregateEqualsRecord) {
    ExperimentConfig cfg = small_config();
    cfg.trials = 1;
    cfg.m_values = {5};
    const ExperimentReport r = run_experiment(cfg);
    ASSERT_EQ(r.records.size(), 2u);
    ASSERT_EQ(r.aggregate.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const TrialRecord& rec = r.records[i];
        const AggregateRow& row = r.aggregate[i];
        EXPECT_EQ(row.method, rec.method);
        EXPECT_EQ(row.trials, 1);
        EXPECT_DOUBLE_EQ(row.success_rate, rec.success ? 100.0 : 0.0);
        EXPECT_EQ(row.mean_pos_error, rec.pos_error);
        EXPECT_EQ(row.mean_theta_error, rec.theta_error);
        EXPECT_DOUBLE_EQ(row.mean_sparsity, rec.sparsity);
        EXPECT_DOUBLE_EQ(row.mean_candidates, rec.candidates);
    }
}

TEST(Experiment, ByteIdenticalAcrossRunsAndWorkers) {
    ExperimentConfig cfg = small_config();
    cfg.workers = 1;
    const ExperimentReport one = run_experiment(cfg);
    cfg.workers = 4;
    const ExperimentReport many = run_experiment(cfg);
    const ExperimentReport again = run_experiment(cfg);
    EXPECT_EQ(trials_csv(one.records, false), trials_csv(many.records, false));
    EXPECT_EQ(trials_csv(many.records, false), trials_csv(again.records, false));
    EXPECT_EQ(aggregate_csv(one.aggregate), aggregate_csv(many.aggregate));
}

TEST(Experiment, TimingsOptIn) {
    ExperimentConfig cfg = small_config();
    cfg.trials = 1;
    cfg.m_values = {0};
    const ExperimentReport r = run_experiment(cfg);
    const auto rows = parse_csv(trials_csv(r.records, true));
    ASSERT_FALSE(rows.empty());
    EXPECT_FALSE(rows[0].at("total_ms").empty());
}

TEST(Svg, EmptySceneIsOutlineOnly) {
    const std::string svg = render_svg(*builtin_scene("square-room"));
    EXPECT_NE(svg.find("class=\"workspace\""), std::string::npos);
    EXPECT_EQ(svg.find("class=\"obstacle\""), std::string::npos);
    EXPECT_EQ(svg.find("class=\"ray"), std::string::npos);
    EXPECT_EQ(svg.find("<circle"), std::string::npos);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Svg, RayLengthsParseBack) {
    Scene scene{testing::square(0, 10), {}};
    const Pose q(5, 5, 0.3);
    for (int i : {0, 2, 4, 6}) {
        const Point2 c = q.position + heading_vector(q.theta + kTwoPi * i / 10) * 2.5;
        const Polygon shape{{{-0.2, -0.2}, {0.2, -0.2}, {0.2, 0.2}, {-0.2, 0.2}}, {}};
        scene.obstacles.push_back({shape, Trajectory::stationary(RigidMotion(c, 0))});
    }
    const TrialSetup trial = make_trial(scene, q, 10, 0);
    ASSERT_EQ(trial.sparsity, 6);
    const std::string svg = render_svg(scene, &trial);

    const std::regex line_re(
        R"re(<line class="ray (static|dynamic)" x1="([^"]+)" y1="([^"]+)" x2="([^"]+)" y2="([^"]+)")re");
    std::vector<double> lengths;
    int dynamic = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line_re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        dynamic += m[1] == "dynamic";
        lengths.push_back(std::hypot(std::stod(m[4]) - std::stod(m[2]), std::stod(m[5]) - std::stod(m[3])));
    }
    ASSERT_EQ(lengths.size(), 10u);
    EXPECT_EQ(dynamic, 4);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(lengths[i], trial.measurements[i].d, 1e-9);
    EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n'), std::count(svg.begin(), svg.end(), '>'));
    EXPECT_NE(svg.find("class=\"obstacle\""), std::string::npos);
    EXPECT_NE(svg.find("class=\"ground-truth\""), std::string::npos);
}

TEST(Svg, ByteIdenticalOutput) {
    ExperimentConfig cfg = small_config();
    const TrialOutcome a = simulate_trial(cfg, 1, 32, 10);
    const TrialOutcome b = simulate_trial(cfg, 1, 32, 10);
    const std::string sa = render_svg(a.setup->scene, &*a.setup, &*a.robust_result);
    EXPECT_EQ(sa, render_svg(b.setup->scene, &*b.setup, &*b.robust_result));
    EXPECT_NE(sa.find("class=\"candidate\""), std::string::npos);
}

#ifdef DYNLOC_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(DYNLOC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
    const fs::path dir = temp_dir("cli");
    const std::string d = dir.string();
    write_text_file(dir / "bowtie.json", R"({"workspace": {"outer": [[0,0],[2,2],[2,0],[0,2]]}})");
    write_text_file(dir / "ms.txt", "0,0,0,5\n0,0,1.5707963267948966,5\n0,0,3.141592653589793,5\n0,0,4.71238898038469,5\n");
    write_text_file(dir / "bad.txt", "0,0,0\n");

    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("localize --scene square-room"), 1);
    EXPECT_EQ(run_cli("localize --scene square-room --measurements " + d + "/ms.txt --k-prime 4 -n 32"), 0);
    EXPECT_EQ(run_cli("localize --scene square-room --measurements " + d + "/bad.txt"), 2);
    EXPECT_EQ(run_cli("localize --scene " + d + "/bowtie.json --measurements " + d + "/ms.txt"), 2);
    EXPECT_EQ(run_cli("localize --scene square-room --measurements " + d + "/ms.txt --k-prime 2"), 2);
    EXPECT_EQ(run_cli("localize --scene " + d + "/missing.json --measurements " + d + "/ms.txt"), 3);

    EXPECT_EQ(run_cli("render --scene floor-plan-like -o " + d + "/plan.svg"), 0);
    EXPECT_TRUE(fs::exists(dir / "plan.svg"));
    EXPECT_EQ(run_cli("simulate --scene random -m 10 -n 32 --svg " + d + "/trial.svg --save-scene " + d +
                      "/trial.json --save-measurements " + d + "/trial.txt"),
              0);
    EXPECT_NO_THROW(load_scene(dir / "trial.json"));
    EXPECT_EQ(load_measurements(dir / "trial.txt").size(), 10u);
    EXPECT_EQ(run_cli("experiment -m 0 -n 16 --trials 2 --out-dir " + d + "/exp"), 0);
    EXPECT_TRUE(fs::exists(dir / "exp" / "trials.csv"));
    EXPECT_TRUE(fs::exists(dir / "exp" / "aggregate.csv"));
}
#endif

}  // namespace
}  // namespace dynloc
