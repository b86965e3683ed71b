#pragma once

#include <cstdint>

#include <evoscape/environment.hpp>
#include <evoscape/network.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

/// Cauchy weight perturbation. The scale is not fixed by the tabled
/// hyperparameters; 0.05 is the project default and is swept in
/// experiments.
struct MutationConfig {
    Scalar scale = 0.05;
    Scalar per_weight_prob = 1.0;
    int offspring_count = 30;

    void validate() const;
};

/// One generation around a parent: every child is produced by a single
/// mutation of the parent and evaluated through the same behavior
/// function. `behaviors` stores child behavior vectors column-wise.
struct OffspringSet {
    Genotype parent;
    Vector parent_behavior;
    std::vector<Genotype> children;
    Matrix behaviors; // behavior_dim x offspring_count
};

/// Each weight independently gains scale * c, c ~ standard Cauchy, with
/// probability per_weight_prob. Non-finite draws are resampled so the
/// child is always finite.
Genotype mutate(const Genotype& g, const MutationConfig& cfg, std::uint64_t seed);

/// Child i of the set seeded with `seed`. Pure in (g, cfg, seed, i), so
/// children may be generated in any order or in parallel.
Genotype mutate_child(const Genotype& g, const MutationConfig& cfg, std::uint64_t seed, int child_index);

OffspringSet sample_neighbors(const Genotype& g, const MutationConfig& cfg,
                              const BehaviorFn& phi, std::uint64_t seed);

} // namespace evoscape
