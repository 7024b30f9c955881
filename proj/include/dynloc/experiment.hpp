#pragma once
/**
 * @file experiment.hpp
 * @brief Seeded success-rate experiments comparing k'-of-k consensus against
 *        the plain-intersection baseline.
 *
 * A trial places the sensor uniformly in a scene with m stationary obstacles,
 * takes k measurements at 2π/k rotation increments and localizes with both
 * methods from the same preimage masks. It succeeds when some candidate lies
 * within success_pos_tol voxel diagonals and success_theta_tol angular cells of
 * the ground truth.
 *
 * Every random draw derives from (seed, trial index), and trials are written in
 * index order, so reports are byte-identical for any worker count.
 */

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynloc/fusion.hpp"
#include "dynloc/simworld.hpp"

namespace dynloc {

struct RandomSceneParams {
    int vertices{16};
    double radius{5.0};
    double jitter{0.4};
};

/// Builtin scene name, scene file path, or "random" (one random workspace per trial).
struct SceneSource {
    std::string name{"random"};
    RandomSceneParams random;

    bool is_random() const { return name == "random"; }
};

struct ExperimentConfig {
    SceneSource scene;
    std::vector<int> m_values{10};
    int k{10};
    int k_prime{6};
    std::vector<int> n_values{64};
    int trials{50};
    std::uint64_t seed{1};
    double success_pos_tol{2.0};    ///< voxel xy-diagonal multiples
    double success_theta_tol{2.0};  ///< cell_dtheta multiples
    std::optional<double> epsilon;
    std::optional<double> delta_pos;
    std::optional<double> delta_theta;
    SizeRange obstacle_size{0.004, 0.012};
    double clearance_diagonals{2.0};
    double eps_meas{0.0};
    double slack_extra{0.0};
    double slope_bound{1.0};
    int workers{0};  ///< 0 = OpenMP default
    bool record_timings{false};

    /// Throws ParameterError for out-of-range settings.
    void validate() const;
};

/// Parses a JSON config; unknown keys are rejected. Throws FormatError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

enum class Method { Robust, Baseline };
const char* to_string(Method m);

struct TrialRecord {
    int trial{0};
    std::uint64_t seed{0};
    std::string scene_id;
    Method method{Method::Robust};
    int n{0};
    int m{0};
    int k{0};
    int k_prime{0};
    int sparsity{0};
    bool skipped{false};
    std::string skip_reason;
    bool success{false};
    std::optional<double> pos_error;    ///< of the candidate closest to ground truth
    std::optional<double> theta_error;
    int candidates{0};
    StageTimings runtime;
};

/// Everything produced by one trial, for inspection beyond the CSV.
struct TrialOutcome {
    TrialRecord robust;
    TrialRecord baseline;
    std::optional<TrialSetup> setup;
    std::optional<LocalizationResult> robust_result;
    std::optional<LocalizationResult> baseline_result;
};

/// Scene for trial `trial_index`, obstacles included.
Scene trial_scene(const ExperimentConfig& cfg, int trial_index, int m);

TrialOutcome simulate_trial(const ExperimentConfig& cfg, int trial_index, int n, int m);

/// (robust, baseline) records for one trial.
std::pair<TrialRecord, TrialRecord> run_trial(const ExperimentConfig& cfg, int trial_index, int n, int m);

struct AggregateRow {
    Method method{Method::Robust};
    int n{0};
    int m{0};
    int trials{0};
    int skipped{0};
    int successes{0};
    double success_rate{0.0};  ///< percent over non-skipped trials
    std::optional<double> mean_pos_error;
    std::optional<double> mean_theta_error;
    double mean_sparsity{0.0};
    double mean_candidates{0.0};
};

struct ExperimentReport {
    std::vector<TrialRecord> records;  ///< (n, m, trial) order, robust before baseline
    std::vector<AggregateRow> aggregate;
};

/// Runs trials × |n_values| × |m_values| trials. `inspect`, when given, sees every
/// outcome in record order after all trials finished.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::function<void(const TrialOutcome&)>& inspect = {});

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

inline constexpr std::string_view kTrialCsvHeader =
    "trial,seed,method,n,m,k,k_prime,sparsity,success,pos_error,theta_error,candidates,preimage_ms,fusion_ms,total_ms";

/// Timing columns are left empty unless `timings` is set, so reruns compare equal.
std::string trials_csv(const std::vector<TrialRecord>& records, bool timings);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

}  // namespace dynloc
