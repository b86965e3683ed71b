#include <evoscape/walk.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evoscape {

WalkKind walk_kind_from_string(const std::string& name) {
    if (name == "selective") return WalkKind::selective;
    if (name == "selective_niche") return WalkKind::selective_niche;
    if (name == "adaptive") return WalkKind::adaptive;
    if (name == "random") return WalkKind::random;
    throw std::invalid_argument("unknown walk kind: " + name);
}

std::string to_string(WalkKind kind) {
    switch (kind) {
    case WalkKind::selective: return "selective";
    case WalkKind::selective_niche: return "selective_niche";
    case WalkKind::adaptive: return "adaptive";
    case WalkKind::random: return "random";
    }
    return "?";
}

void WalkConfig::validate() const {
    if (length < 1)
        throw std::invalid_argument("WalkConfig: length must be >= 1");
    if (kind == WalkKind::adaptive && !(top_fraction > 0 && top_fraction <= 1))
        throw std::invalid_argument("WalkConfig: adaptive top_fraction must be in (0, 1]");
    metric.validate();
    mutation.validate();
}

Index step_selective(const ConstVectorRef& scores) {
    if (scores.size() < 1)
        throw std::invalid_argument("step_selective: no children");
    Index best = 0;
    for (Index j = 1; j < scores.size(); ++j)
        if (scores[j] > scores[best])
            best = j;
    return best;
}

std::optional<Index> step_selective_niche(const ConstVectorRef& scores, const ConstMatrixRef& children_b,
                                          const ConstVectorRef& parent_b, const NicheGrid& grid) {
    const Index parent_niche = grid.cell_index(parent_b);
    std::optional<Index> best;
    for (Index j = 0; j < scores.size(); ++j) {
        if (grid.cell_index(children_b.col(j)) == parent_niche)
            continue;
        if (!best || scores[j] > scores[*best])
            best = j;
    }
    return best;
}

Index step_adaptive(const ConstVectorRef& scores, Scalar top_fraction, Rng& rng) {
    const Index m = scores.size();
    if (m < 1)
        throw std::invalid_argument("step_adaptive: no children");
    if (!(top_fraction > 0 && top_fraction <= 1))
        throw std::invalid_argument("step_adaptive: top_fraction must be in (0, 1]");

    const Index qualifiers =
        std::min<Index>(m, static_cast<Index>(std::ceil(top_fraction * static_cast<Scalar>(m))));
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b])
            return scores[a] > scores[b];
        return a < b;
    });
    std::uniform_int_distribution<Index> pick(0, qualifiers - 1);
    return order[static_cast<std::size_t>(pick(rng))];
}

Index step_random(Index offspring_count, Rng& rng) {
    if (offspring_count < 1)
        throw std::invalid_argument("step_random: no children");
    std::uniform_int_distribution<Index> pick(0, offspring_count - 1);
    return pick(rng);
}

WalkRecord run_walk(const WalkConfig& cfg, const Genotype& initial, const BehaviorFn& phi,
                    const NicheGrid& grid) {
    cfg.validate();

    WalkRecord record;
    record.config = cfg;
    record.steps.reserve(static_cast<std::size_t>(cfg.length));

    Archive archive(cfg.archive_capacity, cfg.archive_admission_prob);
    Genotype parent = initial;
    Vector parent_behavior = phi(parent);
    std::vector<Vector> ancestors{parent_behavior}; // b_0 .. b_i

    for (int step = 0; step < cfg.length; ++step) {
        OffspringSet offspring = sample_neighbors(
            parent, cfg.mutation, phi, derive_seed(cfg.seed, stream::kMutation, static_cast<std::uint64_t>(step)));

        WalkStep rec;
        rec.parent_digest = genotype_digest(parent);
        rec.parent_behavior = parent_behavior;
        rec.report = compute_metric_report(offspring.parent_behavior, offspring.behaviors, grid);

        if (cfg.kind != WalkKind::random) {
            MetricContext ctx;
            ctx.archive = &archive;
            ctx.ancestors = &ancestors;
            ctx.current_step = step;
            rec.child_scores = score_offspring(cfg.metric, offspring, ctx);
        }

        Rng selection_rng(derive_seed(cfg.seed, stream::kSelection, static_cast<std::uint64_t>(step)));
        std::optional<Index> chosen;
        switch (cfg.kind) {
        case WalkKind::selective:
            chosen = step_selective(rec.child_scores);
            break;
        case WalkKind::selective_niche:
            chosen = step_selective_niche(rec.child_scores, offspring.behaviors, parent_behavior, grid);
            break;
        case WalkKind::adaptive:
            chosen = step_adaptive(rec.child_scores, cfg.top_fraction, selection_rng);
            break;
        case WalkKind::random:
            chosen = step_random(offspring.behaviors.cols(), selection_rng);
            break;
        }

        if (chosen) {
            rec.chosen_child = static_cast<int>(*chosen);
            parent = offspring.children[static_cast<std::size_t>(*chosen)];
            parent_behavior = offspring.behaviors.col(*chosen);
        } else {
            rec.chosen_child = -1;
            ++record.stall_count; // parent retained; re-sample next step
        }

        ancestors.push_back(parent_behavior);
        Rng archive_rng(derive_seed(cfg.seed, stream::kArchive, static_cast<std::uint64_t>(step)));
        archive.maybe_admit(parent_behavior, step + 1, archive_rng);
        rec.archive_size = archive.size();
        record.steps.push_back(std::move(rec));
    }
    record.final_parent = std::move(parent);
    return record;
}

} // namespace evoscape
