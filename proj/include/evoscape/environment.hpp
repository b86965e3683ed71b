#pragma once

#include <functional>
#include <vector>

#include <evoscape/network.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

/// Behavior function phi: genotype -> behavior vector. Implementations
/// must be pure so rollouts can run in parallel.
using BehaviorFn = std::function<Vector(const Genotype&)>;

struct EpisodeTrace {
    std::vector<Vector> observations;
    std::vector<Vector> actions;
    int step_count = 0;
};

/// Deterministic 2-D kinematic task: an agent disc moves inside an
/// axis-aligned arena and can push a block disc by overlapping it. The
/// behavior vector is the final block position. The world has no random
/// state, so identical genotypes always map to identical behaviors.
///
/// Observations (8): agent pos, block pos, agent - block, block - block_start.
/// Actions (2): agent velocity in [-1, 1]^2, scaled by step_size.
struct PointPushWorld {
    Vector2 arena_lo{0.0, 0.0};
    Vector2 arena_hi{1.0, 1.0};
    Vector2 agent_start{0.2, 0.5};
    Vector2 block_start{0.5, 0.5};
    Scalar agent_radius = 0.04;
    Scalar block_radius = 0.06;
    Scalar step_size = 0.02;
    int max_steps = 50;

    static constexpr int kObservationDim = 8;
    static constexpr int kActionDim = 2;

    void validate() const;
    BehaviorFn behavior_fn() const;
};

std::pair<Vector, EpisodeTrace> rollout(const PointPushWorld& world, const Genotype& g);

// Closed-form landscapes used as oracles in tests and for the
// dissimila / Markov tools. All operate on the raw weight vector.

/// phi(theta) = c for every genotype.
BehaviorFn constant_landscape(Vector value);

/// phi(theta) = A * theta + b.
BehaviorFn linear_landscape(Matrix a, Vector b);

/// A that picks the first `behavior_dim` coordinates of theta.
Matrix coordinate_selector(Index behavior_dim, Index parameter_count);

/// phi_j(theta) = sum_i sin(c(j, i) * theta_i).
BehaviorFn sinusoid_landscape(Matrix c);

} // namespace evoscape
