#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "osl/bounds.hpp"
#include "osl/training.hpp"

namespace osl {

enum class ExperimentKind {
    RegressionMain,
    RegressionAblation,
    ToyClassification,
    RankAnalysis,
    BoundSweep,
};

struct EvalSettings {
    int grid_points = 200;
    int n_d = 300;
    int decision_batch_size = 2;
};

struct ToySettings {
    int num_shapes = 8;
    int num_colors = 8;
    double noise_std = 0.05;
};

struct BoundSweepSettings {
    double vc_s = 1.0;
    double vc_sbar = 1.0;
    double delta = 0.05;
    double empirical_error = 0.0;
    std::vector<long long> m_values = {10, 100, 1000, 10000};
    std::vector<long long> n_values = {1, 2, 5, 10, 100};
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::RegressionMain;
    TrainConfig train;
    EvalSettings eval;
    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    std::vector<int> k_values = {2, 3, 4};                    // RegressionMain
    std::vector<std::pair<int, int>> ablations = {{50, 2}, {250, 1}, {250, 2}};
    ToySettings toy;                                          // ToyClassification
    std::string dataset_path;                                 // RankAnalysis
    BoundSweepSettings bound;                                 // BoundSweep
};

/// Parses a config file; unknown experiment names or malformed fields throw
/// with a descriptive message. Missing fields keep their defaults.
ExperimentConfig experiment_config_from_json(const std::string& text);

/// Fully-resolved config as JSON (defaults materialized), embedded into
/// every summary file for auditability.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

/// Runs the experiment, writes per-run report/curve/checkpoint files, a
/// merged metrics.csv and summary.json under output_dir. Returns a process
/// exit code: 0 when the experiment completed (individual diverged seeds are
/// recorded in the summary and skipped), nonzero for invalid configs or I/O
/// failures.
int run_experiment(const ExperimentConfig& cfg);

/// Decimal formatting used in every CSV cell: up to 17 significant digits,
/// enough to reparse the exact double.
std::string format_number(double v);

/// RNG stream tag for evaluation draws; eval seeds derive as
/// mix_seed(run_seed, kEvalStream) so CLI eval can reproduce harness metrics.
inline constexpr std::uint64_t kEvalStream = 0xE7A1;

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

}  // namespace osl
