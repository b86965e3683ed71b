#pragma once

#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <evoscape/niche_grid.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

inline constexpr Scalar kProtectedDivisionEpsilon = 1e-12;

/// The per-generation sensitivity/evolvability suite, one row per walk
/// step in the CSV output.
struct MetricReport {
    Scalar ls_max = 0;
    Scalar ls_expected = 0;
    Scalar evolvability_max = 0;
    Scalar evolvability_expected = 0;
    Scalar niche_coverage = 0;
    Scalar ratio_r = 0;
    Scalar ratio_r_star = 0;
};

// Behavior sets are dense matrices with one behavior vector per column.
// All functions are pure and take arbitrary Eigen expressions.

/// max_j |parent - child_j|
template <typename DerivedP, typename DerivedC>
typename DerivedC::Scalar local_sensitivity_max(const Eigen::MatrixBase<DerivedP>& parent_b,
                                                const Eigen::MatrixBase<DerivedC>& children_b) {
    if (children_b.cols() < 1)
        throw std::invalid_argument("local_sensitivity_max: no children");
    using S = typename DerivedC::Scalar;
    S best = 0;
    for (Index j = 0; j < children_b.cols(); ++j)
        best = std::max(best, (children_b.col(j) - parent_b).norm());
    return best;
}

/// mean_j |parent - child_j|
template <typename DerivedP, typename DerivedC>
typename DerivedC::Scalar local_sensitivity_expected(const Eigen::MatrixBase<DerivedP>& parent_b,
                                                     const Eigen::MatrixBase<DerivedC>& children_b) {
    if (children_b.cols() < 1)
        throw std::invalid_argument("local_sensitivity_expected: no children");
    using S = typename DerivedC::Scalar;
    S sum = 0;
    for (Index j = 0; j < children_b.cols(); ++j)
        sum += (children_b.col(j) - parent_b).norm();
    return sum / static_cast<S>(children_b.cols());
}

/// Diameter of the offspring cluster: max pairwise distance.
template <typename Derived>
typename Derived::Scalar evolvability_max(const Eigen::MatrixBase<Derived>& children_b) {
    if (children_b.cols() < 2)
        throw std::invalid_argument("evolvability_max: need at least 2 children");
    using S = typename Derived::Scalar;
    S best = 0;
    for (Index i = 0; i < children_b.cols(); ++i)
        for (Index j = i + 1; j < children_b.cols(); ++j)
            best = std::max(best, (children_b.col(i) - children_b.col(j)).norm());
    return best;
}

/// Mean pairwise distance over ordered pairs; identical to the mean
/// over unordered pairs by symmetry, so unordered pairs are summed.
template <typename Derived>
typename Derived::Scalar evolvability_expected(const Eigen::MatrixBase<Derived>& children_b) {
    const Index m = children_b.cols();
    if (m < 2)
        throw std::invalid_argument("evolvability_expected: need at least 2 children");
    using S = typename Derived::Scalar;
    S sum = 0;
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j)
            sum += (children_b.col(i) - children_b.col(j)).norm();
    return sum / (static_cast<S>(m) * static_cast<S>(m - 1) / 2);
}

/// Mean pairwise distance within one generation.
template <typename Derived>
typename Derived::Scalar population_evolvability(const Eigen::MatrixBase<Derived>& generation_b) {
    return evolvability_expected(generation_b);
}

/// Fraction of grid niches occupied by the children.
template <typename Derived>
Scalar niche_coverage(const Eigen::MatrixBase<Derived>& children_b, const NicheGrid& grid) {
    if (children_b.cols() < 1)
        throw std::invalid_argument("niche_coverage: no children");
    std::unordered_set<Index> occupied;
    Vector b(children_b.rows());
    for (Index j = 0; j < children_b.cols(); ++j) {
        b = children_b.col(j).template cast<Scalar>();
        occupied.insert(grid.cell_index(b));
    }
    return static_cast<Scalar>(occupied.size()) / static_cast<Scalar>(grid.total_cells());
}

/// r = eta_max / (ls_max + eps), r* = eta* / (ls* + eps). Values near 0
/// mark dissimila: sensitive genotypes with low evolvability.
template <typename DerivedP, typename DerivedC>
std::pair<Scalar, Scalar> dissimila_ratios(const Eigen::MatrixBase<DerivedP>& parent_b,
                                           const Eigen::MatrixBase<DerivedC>& children_b,
                                           Scalar epsilon = kProtectedDivisionEpsilon) {
    const Scalar r = evolvability_max(children_b) / (local_sensitivity_max(parent_b, children_b) + epsilon);
    const Scalar r_star =
        evolvability_expected(children_b) / (local_sensitivity_expected(parent_b, children_b) + epsilon);
    return {r, r_star};
}

/// Max local sensitivity over a batch of (parent, children) samples.
inline Scalar global_sensitivity(const std::vector<std::pair<Vector, Matrix>>& samples) {
    if (samples.empty())
        throw std::invalid_argument("global_sensitivity: empty sample");
    Scalar best = 0;
    for (const auto& [parent_b, children_b] : samples)
        best = std::max(best, local_sensitivity_max(parent_b, children_b));
    return best;
}

template <typename DerivedP, typename DerivedC>
MetricReport compute_metric_report(const Eigen::MatrixBase<DerivedP>& parent_b,
                                   const Eigen::MatrixBase<DerivedC>& children_b,
                                   const NicheGrid& grid,
                                   Scalar epsilon = kProtectedDivisionEpsilon) {
    MetricReport report;
    report.ls_max = local_sensitivity_max(parent_b, children_b);
    report.ls_expected = local_sensitivity_expected(parent_b, children_b);
    report.evolvability_max = evolvability_max(children_b);
    report.evolvability_expected = evolvability_expected(children_b);
    report.niche_coverage = niche_coverage(children_b, grid);
    report.ratio_r = report.evolvability_max / (report.ls_max + epsilon);
    report.ratio_r_star = report.evolvability_expected / (report.ls_expected + epsilon);
    return report;
}

} // namespace evoscape
