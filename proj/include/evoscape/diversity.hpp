#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <evoscape/archive.hpp>
#include <evoscape/mutation.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

/// Isotropic Gaussian bandwidth H = h^2 I plus the age discount
/// gamma(age) = lambda^age. lambda = 1 disables discounting.
struct KdeConfig {
    Scalar bandwidth = 0.5;
    Scalar discount_lambda = 1.0;

    void validate() const;
};

enum class MetricKind { knn, knn_noarchive, parent, ancestors, kde };

struct DiversityMetric {
    MetricKind kind = MetricKind::knn;
    int k = 15;
    KdeConfig kde;

    void validate() const;
};

MetricKind metric_kind_from_string(const std::string& name);
std::string to_string(MetricKind kind);

/// Sum of Euclidean distances to the min(k, pool) nearest pool members.
/// The pool is peers followed by archive entries, in insertion order;
/// distance ties keep that order. The candidate must already be
/// excluded from `peers`.
Scalar knn_novelty(const ConstVectorRef& candidate, const ConstMatrixRef& peers,
                   const Archive* archive, Index k);

Scalar parent_distance(const ConstVectorRef& candidate, const ConstVectorRef& parent);

/// Sum of distances to every ancestor behavior, walk start to current
/// parent. The chain acts as a simplified archive.
Scalar ancestor_chain_distance(const ConstVectorRef& candidate, const std::vector<Vector>& ancestors);

/// Gaussian kernel (2 pi)^(-d/2) |H|^(-1/2) exp(-x' H^-1 x / 2) with H = h^2 I.
Scalar gaussian_kernel(const ConstVectorRef& x, Scalar bandwidth);

/// Mean negated kernel mass around the candidate, age-discounted:
/// (1/|Y|) sum_y -K_H(candidate - y) gamma(age(y)). Peers have age 0,
/// archive entries age current_step - insertion_step. Higher = more
/// novel; the supremum 0 is approached far from all of Y.
Scalar kde_novelty(const ConstVectorRef& candidate, const ConstMatrixRef& peers,
                   const Archive* archive, const KdeConfig& cfg, std::int64_t current_step);

/// Inputs the walk engine hands to the metric for one generation.
struct MetricContext {
    const Archive* archive = nullptr;
    const std::vector<Vector>* ancestors = nullptr; // behaviors b_0 .. b_i
    std::int64_t current_step = 0;
};

/// G-value of every child in the set. Each child's peer pool is its
/// siblings (itself excluded) plus the archive where the metric uses one.
Vector score_offspring(const DiversityMetric& metric, const OffspringSet& set,
                       const MetricContext& ctx);

} // namespace evoscape
