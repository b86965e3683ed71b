#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <evoscape/environment.hpp>
#include <evoscape/walk.hpp>

using namespace evoscape;

namespace {

Vector scores_of(std::initializer_list<double> values) {
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values)
        v[i++] = x;
    return v;
}

WalkConfig base_config(WalkKind kind, int length, std::uint64_t seed) {
    WalkConfig cfg;
    cfg.kind = kind;
    cfg.length = length;
    cfg.seed = seed;
    cfg.metric.kind = MetricKind::knn;
    cfg.metric.k = 5;
    cfg.mutation.scale = 0.1;
    cfg.mutation.offspring_count = 12;
    return cfg;
}

bool records_equal(const WalkRecord& a, const WalkRecord& b) {
    if (a.steps.size() != b.steps.size() || a.stall_count != b.stall_count)
        return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const WalkStep& x = a.steps[i];
        const WalkStep& y = b.steps[i];
        if (x.parent_digest != y.parent_digest || x.chosen_child != y.chosen_child)
            return false;
        if (x.parent_behavior != y.parent_behavior)
            return false;
        if (x.child_scores.size() != y.child_scores.size() || x.child_scores != y.child_scores)
            return false;
        if (x.report.evolvability_expected != y.report.evolvability_expected)
            return false;
    }
    return a.final_parent.weights == b.final_parent.weights;
}

} // namespace

TEST_CASE("selective step takes the argmax, ties to the lowest index") {
    CHECK(step_selective(scores_of({1, 9, 3})) == 1);
    CHECK(step_selective(scores_of({4, 4, 4})) == 0);
    CHECK(step_selective(scores_of({2, 7, 7})) == 1);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        Vector scores(20);
        for (Index i = 0; i < 20; ++i)
            scores[i] = u(rng);
        Index oracle = 0;
        for (Index i = 1; i < 20; ++i)
            if (scores[i] > scores[oracle])
                oracle = i;
        CHECK(step_selective(scores) == oracle);
    }
}

TEST_CASE("niche-variant step filters by the parent's niche") {
    const NicheGrid grid = NicheGrid::uniform(2, 0.0, 1.0, 10);
    Vector parent(2);
    parent << 0.55, 0.55; // cell (5, 5)

    Matrix inside = Matrix::Constant(2, 3, 0.56); // same cell as the parent
    CHECK(!step_selective_niche(scores_of({1, 2, 3}), inside, parent, grid).has_value());

    Matrix mixed(2, 3);
    mixed.col(0) << 0.56, 0.56;
    mixed.col(1) << 0.05, 0.05; // only escapee, low score
    mixed.col(2) << 0.57, 0.57;
    const auto chosen = step_selective_niche(scores_of({9, 1, 8}), mixed, parent, grid);
    REQUIRE(chosen.has_value());
    CHECK(*chosen == 1);

    // Filtered-argmax oracle on random mixtures.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix children(2, 10);
        Vector scores(10);
        for (Index j = 0; j < 10; ++j) {
            children(0, j) = pos(rng);
            children(1, j) = pos(rng);
            scores[j] = pos(rng);
        }
        const auto got = step_selective_niche(scores, children, parent, grid);
        std::optional<Index> oracle;
        for (Index j = 0; j < 10; ++j) {
            if (grid.cell_index(children.col(j)) == grid.cell_index(parent))
                continue;
            if (!oracle || scores[j] > scores[*oracle])
                oracle = j;
        }
        CHECK(got == oracle);
    }
}

TEST_CASE("adaptive step: qualifier sizes and degenerate fractions") {
    Rng rng(42);

    // top_fraction = 1/m reduces to the selective rule.
    for (int trial = 0; trial < 30; ++trial) {
        Vector scores(30);
        std::uniform_real_distribution<double> u(0, 1);
        for (Index i = 0; i < 30; ++i)
            scores[i] = u(rng);
        Rng pick(trial);
        CHECK(step_adaptive(scores, 1.0 / 30.0, pick) == step_selective(scores));
    }

    // top_fraction = 1 draws uniformly over all children.
    std::vector<int> counts(4, 0);
    for (int trial = 0; trial < 10000; ++trial) {
        Rng pick(trial);
        counts[static_cast<std::size_t>(step_adaptive(scores_of({1, 2, 3, 4}), 1.0, pick))]++;
    }
    for (int c : counts)
        CHECK(static_cast<double>(c) / 10000.0 == doctest::Approx(0.25).epsilon(0.1));

    // top_fraction = 0.5 with m = 30: exactly the 15 best qualify.
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        Vector scores(30);
        for (Index i = 0; i < 30; ++i)
            scores[i] = u(rng);
        std::vector<Index> order(30);
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(),
                  [&](Index a, Index b) { return scores[a] > scores[b]; });
        const std::vector<Index> qualifiers(order.begin(), order.begin() + 15);
        Rng pick(1000 + trial);
        const Index chosen = step_adaptive(scores, 0.5, pick);
        CHECK(std::find(qualifiers.begin(), qualifiers.end(), chosen) != qualifiers.end());
    }
}

TEST_CASE("random step is uniform and seed-deterministic") {
    Rng single(0);
    CHECK(step_random(1, single) == 0);

    std::vector<int> counts(5, 0);
    Rng rng(9);
    for (int i = 0; i < 10000; ++i)
        counts[static_cast<std::size_t>(step_random(5, rng))]++;
    for (int c : counts)
        CHECK(static_cast<double>(c) / 10000.0 == doctest::Approx(0.2).epsilon(0.1));

    Rng a(77), b(77);
    for (int i = 0; i < 100; ++i)
        CHECK(step_random(12, a) == step_random(12, b));
}

TEST_CASE("run_walk produces exactly length steps and is reproducible") {
    const NetworkShape shape(3, {4}, 2);
    const BehaviorFn phi = linear_landscape(coordinate_selector(2, shape.parameter_count()),
                                            Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 10);
    const Genotype initial = xavier_init(shape, 50);

    WalkConfig cfg = base_config(WalkKind::selective, 10, 505);
    const WalkRecord a = run_walk(cfg, initial, phi, grid);
    const WalkRecord b = run_walk(cfg, initial, phi, grid);
    CHECK(a.steps.size() == 10);
    CHECK(records_equal(a, b));

    cfg.seed = 506;
    const WalkRecord c = run_walk(cfg, initial, phi, grid);
    CHECK(!records_equal(a, c));
}

TEST_CASE("run_walk with length 1 evaluates one offspring set") {
    const NetworkShape shape(3, {4}, 2);
    const BehaviorFn phi = linear_landscape(coordinate_selector(2, shape.parameter_count()),
                                            Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 10);
    WalkConfig cfg = base_config(WalkKind::selective, 1, 3);
    cfg.mutation.offspring_count = 30;
    const WalkRecord record = run_walk(cfg, xavier_init(shape, 1), phi, grid);
    REQUIRE(record.steps.size() == 1);
    CHECK(record.steps[0].child_scores.size() == 30);
}

TEST_CASE("constant landscape yields zero evolvability at every step") {
    const NetworkShape shape(3, {4}, 2);
    Vector value(2);
    value << 0.5, 0.5;
    const BehaviorFn phi = constant_landscape(value);
    const NicheGrid grid = NicheGrid::uniform(2, 0.0, 1.0, 10);
    for (WalkKind kind : {WalkKind::selective, WalkKind::adaptive, WalkKind::random}) {
        WalkConfig cfg = base_config(kind, 5, 8);
        cfg.top_fraction = 0.5;
        const WalkRecord record = run_walk(cfg, xavier_init(shape, 2), phi, grid);
        for (const WalkStep& step : record.steps) {
            CHECK(step.report.evolvability_expected == 0.0);
            CHECK(step.report.evolvability_max == 0.0);
        }
    }
}

TEST_CASE("each chosen child is one mutation away from its parent") {
    const NetworkShape shape(3, {4}, 2);
    const BehaviorFn phi = linear_landscape(coordinate_selector(2, shape.parameter_count()),
                                            Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 10);
    WalkConfig cfg = base_config(WalkKind::selective, 8, 111);
    const Genotype initial = xavier_init(shape, 4);
    const WalkRecord record = run_walk(cfg, initial, phi, grid);

    Genotype parent = initial;
    for (std::size_t s = 0; s < record.steps.size(); ++s) {
        CHECK(record.steps[s].parent_digest == genotype_digest(parent));
        const int chosen = record.steps[s].chosen_child;
        REQUIRE(chosen >= 0);
        const std::uint64_t step_seed =
            derive_seed(cfg.seed, stream::kMutation, static_cast<std::uint64_t>(s));
        parent = mutate_child(parent, cfg.mutation, step_seed, chosen);
    }
    CHECK(parent.weights == record.final_parent.weights);
}

TEST_CASE("adaptive at 1/m agrees with the selective walk step by step") {
    const NetworkShape shape(3, {4}, 2);
    const BehaviorFn phi = linear_landscape(coordinate_selector(2, shape.parameter_count()),
                                            Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 10);
    const Genotype initial = xavier_init(shape, 6);

    WalkConfig selective = base_config(WalkKind::selective, 12, 77);
    WalkConfig adaptive = base_config(WalkKind::adaptive, 12, 77);
    adaptive.top_fraction = 1.0 / adaptive.mutation.offspring_count;

    const WalkRecord a = run_walk(selective, initial, phi, grid);
    const WalkRecord b = run_walk(adaptive, initial, phi, grid);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t s = 0; s < a.steps.size(); ++s)
        CHECK(a.steps[s].chosen_child == b.steps[s].chosen_child);
}

TEST_CASE("random walks skip metric evaluation") {
    const NetworkShape shape(3, {4}, 2);
    const BehaviorFn phi = linear_landscape(coordinate_selector(2, shape.parameter_count()),
                                            Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 10);
    WalkConfig cfg = base_config(WalkKind::random, 4, 12);
    const WalkRecord record = run_walk(cfg, xavier_init(shape, 3), phi, grid);
    for (const WalkStep& step : record.steps)
        CHECK(step.child_scores.size() == 0); // recorded as absent
}

TEST_CASE("niche-variant stalls are counted and retain the parent") {
    const NetworkShape shape(3, {4}, 2);
    // Constant landscape: every child lands in the parent's niche.
    Vector value(2);
    value << 0.5, 0.5;
    const BehaviorFn phi = constant_landscape(value);
    const NicheGrid grid = NicheGrid::uniform(2, 0.0, 1.0, 10);
    WalkConfig cfg = base_config(WalkKind::selective_niche, 6, 19);
    const Genotype initial = xavier_init(shape, 9);
    const WalkRecord record = run_walk(cfg, initial, phi, grid);
    CHECK(record.stall_count == 6);
    for (const WalkStep& step : record.steps) {
        CHECK(step.chosen_child == -1);
        CHECK(step.parent_digest == genotype_digest(initial));
    }
    CHECK(record.final_parent.weights == initial.weights);
}
