#include <evoscape/diversity.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evoscape {

void KdeConfig::validate() const {
    if (!(bandwidth > 0))
        throw std::invalid_argument("KdeConfig: bandwidth must be > 0");
    if (!(discount_lambda > 0 && discount_lambda <= 1))
        throw std::invalid_argument("KdeConfig: discount_lambda must be in (0, 1]");
}

void DiversityMetric::validate() const {
    if (k < 1)
        throw std::invalid_argument("DiversityMetric: k must be >= 1");
    kde.validate();
}

MetricKind metric_kind_from_string(const std::string& name) {
    if (name == "knn") return MetricKind::knn;
    if (name == "knn_noarchive") return MetricKind::knn_noarchive;
    if (name == "parent") return MetricKind::parent;
    if (name == "ancestors") return MetricKind::ancestors;
    if (name == "kde") return MetricKind::kde;
    throw std::invalid_argument("unknown diversity metric: " + name);
}

std::string to_string(MetricKind kind) {
    switch (kind) {
    case MetricKind::knn: return "knn";
    case MetricKind::knn_noarchive: return "knn_noarchive";
    case MetricKind::parent: return "parent";
    case MetricKind::ancestors: return "ancestors";
    case MetricKind::kde: return "kde";
    }
    return "?";
}

Scalar knn_novelty(const ConstVectorRef& candidate, const ConstMatrixRef& peers,
                   const Archive* archive, Index k) {
    if (k < 1)
        throw std::invalid_argument("knn_novelty: k must be >= 1");
    const Index pool_size = peers.cols() + (archive ? archive->size() : 0);
    if (pool_size == 0)
        throw std::invalid_argument("knn_novelty: empty pool");

    std::vector<std::pair<Scalar, Index>> dist;
    dist.reserve(static_cast<std::size_t>(pool_size));
    for (Index j = 0; j < peers.cols(); ++j)
        dist.emplace_back((peers.col(j) - candidate).norm(), j);
    if (archive)
        for (Index j = 0; j < archive->size(); ++j)
            dist.emplace_back(((*archive)[j].behavior - candidate).norm(), peers.cols() + j);

    std::sort(dist.begin(), dist.end()); // ties fall back to insertion order
    const Index take = std::min<Index>(k, pool_size);
    Scalar sum = 0;
    for (Index j = 0; j < take; ++j)
        sum += dist[static_cast<std::size_t>(j)].first;
    return sum;
}

Scalar parent_distance(const ConstVectorRef& candidate, const ConstVectorRef& parent) {
    if (candidate.size() != parent.size())
        throw std::invalid_argument("parent_distance: dimension mismatch");
    return (candidate - parent).norm();
}

Scalar ancestor_chain_distance(const ConstVectorRef& candidate, const std::vector<Vector>& ancestors) {
    if (ancestors.empty())
        throw std::invalid_argument("ancestor_chain_distance: empty chain");
    Scalar sum = 0;
    for (const Vector& a : ancestors) {
        if (a.size() != candidate.size())
            throw std::invalid_argument("ancestor_chain_distance: dimension mismatch");
        sum += (candidate - a).norm();
    }
    return sum;
}

Scalar gaussian_kernel(const ConstVectorRef& x, Scalar bandwidth) {
    const auto d = static_cast<Scalar>(x.size());
    const Scalar norm_const =
        std::pow(2.0 * std::numbers::pi_v<Scalar>, -d / 2.0) * std::pow(bandwidth, -d);
    return norm_const * std::exp(-x.squaredNorm() / (2.0 * bandwidth * bandwidth));
}

Scalar kde_novelty(const ConstVectorRef& candidate, const ConstMatrixRef& peers,
                   const Archive* archive, const KdeConfig& cfg, std::int64_t current_step) {
    cfg.validate();
    const Index pool_size = peers.cols() + (archive ? archive->size() : 0);
    if (pool_size == 0)
        throw std::invalid_argument("kde_novelty: empty pool");

    Scalar sum = 0;
    for (Index j = 0; j < peers.cols(); ++j)
        sum += -gaussian_kernel(candidate - peers.col(j), cfg.bandwidth);
    if (archive) {
        for (const Archive::Entry& e : *archive) {
            const auto age = static_cast<Scalar>(current_step - e.insertion_step);
            const Scalar discount = std::pow(cfg.discount_lambda, age);
            sum += -gaussian_kernel(candidate - e.behavior, cfg.bandwidth) * discount;
        }
    }
    return sum / static_cast<Scalar>(pool_size);
}

namespace {

Matrix siblings_without(const Matrix& behaviors, Index skip) {
    Matrix peers(behaviors.rows(), behaviors.cols() - 1);
    Index out = 0;
    for (Index j = 0; j < behaviors.cols(); ++j)
        if (j != skip)
            peers.col(out++) = behaviors.col(j);
    return peers;
}

} // namespace

Vector score_offspring(const DiversityMetric& metric, const OffspringSet& set,
                       const MetricContext& ctx) {
    metric.validate();
    const Index m = set.behaviors.cols();
    Vector scores(m);
    for (Index j = 0; j < m; ++j) {
        const auto candidate = set.behaviors.col(j);
        switch (metric.kind) {
        case MetricKind::knn:
            scores[j] = knn_novelty(candidate, siblings_without(set.behaviors, j), ctx.archive, metric.k);
            break;
        case MetricKind::knn_noarchive:
            scores[j] = knn_novelty(candidate, siblings_without(set.behaviors, j), nullptr, metric.k);
            break;
        case MetricKind::parent:
            scores[j] = parent_distance(candidate, set.parent_behavior);
            break;
        case MetricKind::ancestors:
            if (!ctx.ancestors)
                throw std::invalid_argument("score_offspring: ancestors metric needs the chain");
            scores[j] = ancestor_chain_distance(candidate, *ctx.ancestors);
            break;
        case MetricKind::kde:
            scores[j] = kde_novelty(candidate, siblings_without(set.behaviors, j), ctx.archive,
                                    metric.kde, ctx.current_step);
            break;
        }
    }
    return scores;
}

} // namespace evoscape
