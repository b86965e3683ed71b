#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <evoscape/archive.hpp>
#include <evoscape/diversity.hpp>
#include <evoscape/landscape_metrics.hpp>
#include <evoscape/mutation.hpp>
#include <evoscape/niche_grid.hpp>

namespace evoscape {

enum class WalkKind { selective, selective_niche, adaptive, random };

WalkKind walk_kind_from_string(const std::string& name);
std::string to_string(WalkKind kind);

struct WalkConfig {
    WalkKind kind = WalkKind::selective;
    Scalar top_fraction = 1.0; // adaptive only: fraction of children eligible
    int length = 50;
    DiversityMetric metric;
    MutationConfig mutation;
    std::uint64_t seed = 0;
    Index archive_capacity = 1200;
    Scalar archive_admission_prob = 0.10;

    void validate() const;
};

struct WalkStep {
    std::uint64_t parent_digest = 0;
    Vector parent_behavior;
    MetricReport report;       // computed on the full offspring set, pre-selection
    int chosen_child = -1;     // -1: parent retained (niche-variant stall)
    Vector child_scores;       // empty for random walks
    Index archive_size = 0;    // after this step's admission
};

struct WalkRecord {
    WalkConfig config;
    std::vector<WalkStep> steps;
    Genotype final_parent;
    int stall_count = 0;
};

/// Child with the highest score; ties go to the lowest index.
Index step_selective(const ConstVectorRef& scores);

/// Highest-scoring child whose niche differs from the parent's; empty
/// when every child shares the parent's niche (the walk stalls).
std::optional<Index> step_selective_niche(const ConstVectorRef& scores, const ConstMatrixRef& children_b,
                                          const ConstVectorRef& parent_b, const NicheGrid& grid);

/// Uniform draw among the ceil(top_fraction * m) best children. The
/// threshold is the score quantile, so the qualifier set is never empty
/// for top_fraction > 0; top_fraction = 1/m reduces to step_selective
/// and 1.0 to a random walk.
Index step_adaptive(const ConstVectorRef& scores, Scalar top_fraction, Rng& rng);

Index step_random(Index offspring_count, Rng& rng);

/// Runs one single-state walk of cfg.length steps. Each step samples an
/// offspring set, scores it, records the metric suite, applies the step
/// rule, and offers the new parent's behavior to the archive.
WalkRecord run_walk(const WalkConfig& cfg, const Genotype& initial, const BehaviorFn& phi,
                    const NicheGrid& grid);

} // namespace evoscape
