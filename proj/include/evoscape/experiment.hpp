#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <evoscape/environment.hpp>
#include <evoscape/markov.hpp>
#include <evoscape/niche_grid.hpp>
#include <evoscape/stats.hpp>
#include <evoscape/walk.hpp>

namespace evoscape {

/// Behavior-function selection for a whole experiment. point_push is
/// the episodic surrogate; the analytic kinds exist for oracle checks
/// and cheap scans.
struct EnvironmentSpec {
    std::string kind = "point_push"; // point_push | linear | sinusoid | constant
    PointPushWorld world;
    Index behavior_dim = 2;
    Scalar linear_scale = 1.0;      // linear: phi = scale * first coords
    Scalar sinusoid_frequency = 1.0;
    Index sinusoid_terms = 4;       // leading genotype coords that enter the sum
    Vector constant_value;

    BehaviorFn make(const NetworkShape& shape) const;
    NetworkShape default_shape() const;
    NicheGrid default_grid() const;
};

struct ExperimentConfig {
    std::uint64_t global_seed = 1;
    int runs_per_config = 10;
    int parallelism = 1;
    std::filesystem::path output_dir = "out";

    EnvironmentSpec environment;
    NetworkShape network;
    NicheGrid grid;
    MutationConfig mutation;
    Index archive_capacity = 1200;
    Scalar archive_admission_prob = 0.10;
    int walk_length = 25;
    int knn_k = 15;
    KdeConfig kde;

    // pressure-sweep
    std::vector<Scalar> sweep_top_fractions;
    std::string sweep_metric = "knn";

    // metric-comparison
    std::vector<std::string> comparison_metrics{"knn", "knn_noarchive", "ancestors", "kde"};
    std::string comparison_walk_kind = "selective";

    // markov-estimate
    Index markov_budget = 20000;
    int markov_genotype_count = 5;
    LEvolvabilityParams markov_params;
    bool markov_per_niche = true;
    std::optional<std::filesystem::path> markov_transition_file; // injection mode

    // dissimila-scan
    int dissimila_genotype_count = 50;

    static ExperimentConfig with_profile(const std::string& profile); // desk | paper
    static ExperimentConfig load(const std::filesystem::path& path,
                                 const std::string& profile = "desk");

    void finalize(); // fill derived defaults (shape, grid, sweep levels)
    DiversityMetric make_metric(const std::string& name) const;
};

/// One named walk configuration inside a batch (a sweep level or a
/// metric arm), executed runs_per_config times.
struct BatchEntry {
    std::string label;
    WalkConfig walk;
    Scalar top_fraction_tag = -1; // < 0: not part of a pressure sweep
};

/// Per-run series extracted from a WalkRecord: the metric suite per
/// step plus the final parent, which is what the run-state file keeps.
struct RunSeries {
    std::vector<MetricReport> reports;
    Genotype final_parent;
};

/// Runs every (entry, run) pair, parallel over runs, resuming finished
/// runs from the state directory when present. Results are ordered
/// (entry-major, run-minor) regardless of the thread count.
std::vector<std::vector<RunSeries>> run_batch(const ExperimentConfig& cfg,
                                              const std::vector<BatchEntry>& entries,
                                              const std::string& command_tag);

struct PressureSweepOutcome {
    Correlation final_step;         // selectivity (1/top_fraction) vs final evolvability
    std::vector<Scalar> top_fractions;
    std::vector<Scalar> final_means; // per level, mean final-step expected evolvability
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
};

struct MetricComparisonOutcome {
    KruskalWallisResult final_step;
    std::vector<std::string> metrics;
    std::vector<Scalar> final_means;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
};

struct MarkovOutcome {
    TransitionMatrix transition;
    std::vector<LEvolvabilityEstimate> genotype_estimates;
    std::vector<Scalar> genotype_child_coverage;
    std::vector<LEvolvabilityEstimate> niche_estimates;
    std::filesystem::path matrix_path;
    std::filesystem::path table_path;
};

struct DissimilaRow {
    std::uint64_t digest = 0;
    Scalar ls_expected = 0;
    Scalar evolvability_expected = 0;
    Scalar r_star = 0;
};

struct DissimilaOutcome {
    std::vector<DissimilaRow> rows; // ascending by r_star
    std::filesystem::path csv_path;
};

PressureSweepOutcome cmd_pressure_sweep(const ExperimentConfig& cfg);
MetricComparisonOutcome cmd_metric_comparison(const ExperimentConfig& cfg);
MarkovOutcome cmd_markov_estimate(const ExperimentConfig& cfg);
DissimilaOutcome cmd_dissimila_scan(const ExperimentConfig& cfg);

/// Shortest text representation that parses back to the same double.
std::string format_double(Scalar v);

} // namespace evoscape
