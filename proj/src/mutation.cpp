#include <evoscape/mutation.hpp>

#include <cmath>
#include <stdexcept>

namespace evoscape {

void MutationConfig::validate() const {
    if (!(scale > 0))
        throw std::invalid_argument("MutationConfig: scale must be > 0");
    if (!(per_weight_prob > 0 && per_weight_prob <= 1))
        throw std::invalid_argument("MutationConfig: per_weight_prob must be in (0, 1]");
    if (offspring_count < 2)
        throw std::invalid_argument("MutationConfig: offspring_count must be >= 2");
}

Genotype mutate(const Genotype& g, const MutationConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    std::cauchy_distribution<Scalar> cauchy(0.0, 1.0);
    std::uniform_real_distribution<Scalar> uniform(0.0, 1.0);
    const bool mask = cfg.per_weight_prob < 1.0;

    Vector w = g.weights;
    for (Index i = 0; i < w.size(); ++i) {
        if (mask && uniform(rng) >= cfg.per_weight_prob)
            continue;
        Scalar candidate;
        do {
            candidate = w[i] + cfg.scale * cauchy(rng);
        } while (!std::isfinite(candidate));
        w[i] = candidate;
    }
    return Genotype(g.shape, std::move(w));
}

Genotype mutate_child(const Genotype& g, const MutationConfig& cfg, std::uint64_t seed, int child_index) {
    return mutate(g, cfg, derive_seed(seed, static_cast<std::uint64_t>(child_index)));
}

OffspringSet sample_neighbors(const Genotype& g, const MutationConfig& cfg,
                              const BehaviorFn& phi, std::uint64_t seed) {
    cfg.validate();
    OffspringSet set;
    set.parent = g;
    set.parent_behavior = phi(g);
    set.children.reserve(cfg.offspring_count);

    set.behaviors.resize(set.parent_behavior.size(), cfg.offspring_count);
    for (int i = 0; i < cfg.offspring_count; ++i) {
        Genotype child = mutate_child(g, cfg, seed, i);
        set.behaviors.col(i) = phi(child);
        set.children.push_back(std::move(child));
    }
    return set;
}

} // namespace evoscape
