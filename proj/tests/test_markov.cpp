#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include <evoscape/environment.hpp>
#include <evoscape/markov.hpp>

using namespace evoscape;

namespace {

TransitionMatrix from_probabilities(Matrix p) {
    const Index n = p.rows();
    TransitionMatrix t;
    t.visit_counts = MatrixI::Zero(n, n);
    t.row_observed.assign(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < n; ++i)
        t.row_observed[static_cast<std::size_t>(i)] = p.row(i).sum() > 0;
    t.probabilities = std::move(p);
    return t;
}

struct WalkPath {
    std::vector<Index> states;
    double prob;
};

/// Every positive-probability path of one chain: l + 1 states, initial
/// state from `initial`, unobserved rows absorbing.
std::vector<WalkPath> enumerate_paths(const TransitionMatrix& t, const Vector& initial, int l) {
    std::vector<WalkPath> paths;
    std::function<void(WalkPath&, int)> extend = [&](WalkPath& path, int remaining) {
        if (remaining == 0) {
            paths.push_back(path);
            return;
        }
        const Index s = path.states.back();
        if (!t.row_observed[static_cast<std::size_t>(s)]) {
            WalkPath next = path;
            next.states.push_back(s); // absorbing
            extend(next, remaining - 1);
            return;
        }
        for (Index j = 0; j < t.n(); ++j) {
            if (t.probabilities(s, j) <= 0)
                continue;
            WalkPath next = path;
            next.states.push_back(j);
            next.prob *= t.probabilities(s, j);
            extend(next, remaining - 1);
        }
    };
    for (Index s = 0; s < initial.size(); ++s) {
        if (initial[s] <= 0)
            continue;
        WalkPath path{{s}, initial[s]};
        extend(path, l);
    }
    return paths;
}

/// Exact E[coverage] by exhaustive path enumeration, U in {1, 2}.
double enumerated_expected_coverage(const TransitionMatrix& t, const Vector& initial, int l, int u) {
    const auto paths = enumerate_paths(t, initial, l);
    const double n = static_cast<double>(t.n());
    double expected = 0;
    if (u == 1) {
        for (const WalkPath& p : paths) {
            const std::set<Index> distinct(p.states.begin(), p.states.end());
            expected += p.prob * static_cast<double>(distinct.size()) / n;
        }
        return expected;
    }
    REQUIRE(u == 2);
    for (const WalkPath& p : paths) {
        for (const WalkPath& q : paths) {
            std::set<Index> distinct(p.states.begin(), p.states.end());
            distinct.insert(q.states.begin(), q.states.end());
            expected += p.prob * q.prob * static_cast<double>(distinct.size()) / n;
        }
    }
    return expected;
}

/// Monte-Carlo mean and standard error of the coverage.
std::pair<double, double> mc_coverage(const TransitionMatrix& t, const Vector& initial, int l,
                                      int u, int repeats, std::uint64_t seed) {
    double sum = 0, sum_sq = 0;
    for (int r = 0; r < repeats; ++r) {
        const double c = simulate_descendants(t, initial, l, u, derive_seed(seed, r)).coverage;
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / repeats;
    const double var = std::max(0.0, (sum_sq - repeats * mean * mean) / (repeats - 1));
    return {mean, std::sqrt(var / repeats)};
}

} // namespace

TEST_CASE("constant landscape concentrates all transitions on one self-loop") {
    const NetworkShape shape(3, {}, 2);
    Vector value(2);
    value << 0.55, 0.55;
    const BehaviorFn phi = constant_landscape(value);
    const NicheGrid grid = NicheGrid::uniform(2, 0.0, 1.0, 10);
    MutationConfig mutation;
    mutation.offspring_count = 2;

    const TransitionMatrix t =
        estimate_transition_matrix(grid, phi, mutation, {xavier_init(shape, 1)}, 200, 5);
    CHECK(t.degenerate);
    const Index cell = grid.cell_index(value);
    CHECK(t.probabilities(cell, cell) == 1.0);
    CHECK(t.visit_counts(cell, cell) == 200);
    CHECK(t.visit_counts.sum() == 200);
}

TEST_CASE("tiny mutations keep children in the parent's cell") {
    const NetworkShape shape(9, {}, 2); // parameter_count = 20
    const BehaviorFn phi =
        linear_landscape(coordinate_selector(2, shape.parameter_count()), Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 10);
    MutationConfig mutation;
    mutation.scale = 1e-6;
    mutation.offspring_count = 2;

    // Elites planted at several cell centers.
    std::vector<Genotype> elites;
    for (double x : {-1.8, -1.0, 0.2, 1.0, 1.8})
        for (double y : {-1.4, 0.6}) {
            Vector w = Vector::Zero(shape.parameter_count());
            w[0] = x;
            w[1] = y;
            elites.emplace_back(shape, w);
        }

    const TransitionMatrix t = estimate_transition_matrix(grid, phi, mutation, elites, 2000, 9);
    CHECK(!t.degenerate);
    double diagonal_mass = 0;
    std::int64_t total = 0;
    for (Index i = 0; i < t.n(); ++i) {
        diagonal_mass += static_cast<double>(t.visit_counts(i, i));
        total += t.visit_counts.row(i).sum();
    }
    CHECK(total == 2000);
    CHECK(diagonal_mass / static_cast<double>(total) > 0.9);

    for (Index i = 0; i < t.n(); ++i)
        if (t.row_observed[static_cast<std::size_t>(i)])
            CHECK(t.probabilities.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("child distribution is a proper histogram") {
    const NetworkShape shape(3, {}, 2);
    Vector value(2);
    value << 0.31, 0.72;
    const BehaviorFn phi = constant_landscape(value);
    const NicheGrid grid = NicheGrid::uniform(2, 0.0, 1.0, 10);
    MutationConfig mutation;

    const Vector d = child_distribution(xavier_init(shape, 3), grid, phi, mutation, 50, 17);
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((d.array() > 0).count() == 1); // one-hot on a constant landscape
    CHECK(d[grid.cell_index(value)] == 1.0);

    const Vector one_hot = one_hot_distribution(8, 3);
    CHECK(one_hot.sum() == 1.0);
    CHECK(one_hot[3] == 1.0);
    CHECK_THROWS_AS(one_hot_distribution(8, 9), std::invalid_argument);
}

TEST_CASE("identity chain coverage is exactly 1/n from a one-hot start") {
    const Index n = 5;
    const TransitionMatrix t = from_probabilities(Matrix::Identity(n, n));
    for (int l : {1, 2, 3})
        for (int u : {1, 2, 4}) {
            const DescendantSim sim = simulate_descendants(t, one_hot_distribution(n, 2), l, u, 99);
            CHECK(sim.coverage == 1.0 / static_cast<double>(n));
            CHECK(sim.unobserved_row_hits == 0);
        }
}

TEST_CASE("uniform 3-state chain matches the enumeration oracle") {
    const Index n = 3;
    const TransitionMatrix t = from_probabilities(Matrix::Constant(n, n, 1.0 / 3.0));
    const Vector d = Vector::Constant(n, 1.0 / 3.0);

    // l = 1, U = 1: all 9 two-step paths are equiprobable;
    // E[distinct] = 3 (1 - (2/3)^2) = 5/3, coverage 5/9.
    const double oracle = enumerated_expected_coverage(t, d, 1, 1);
    CHECK(oracle == doctest::Approx(5.0 / 9.0).epsilon(1e-12));

    const auto [mean, se] = mc_coverage(t, d, 1, 1, 20000, 4);
    CHECK(std::abs(mean - oracle) < 3.0 * se);
}

TEST_CASE("hand-built chains match the enumeration oracle within 3 SE") {
    Matrix p(4, 4);
    p << 0.5, 0.5, 0.0, 0.0,
         0.1, 0.1, 0.4, 0.4,
         0.0, 0.0, 1.0, 0.0,
         0.25, 0.25, 0.25, 0.25;
    const TransitionMatrix t = from_probabilities(p);
    Vector d(4);
    d << 0.5, 0.5, 0.0, 0.0;

    for (int l : {1, 2, 3})
        for (int u : {1, 2}) {
            const double oracle = enumerated_expected_coverage(t, d, l, u);
            const auto [mean, se] = mc_coverage(t, d, l, u, 20000, 1000 + l * 10 + u);
            INFO("l = " << l << ", u = " << u);
            CHECK(std::abs(mean - oracle) < 3.0 * std::max(se, 1e-6));
        }
}

TEST_CASE("unobserved rows absorb and are reported") {
    Matrix p = Matrix::Zero(3, 3);
    p(0, 1) = 1.0; // row 1 and 2 unobserved
    const TransitionMatrix t = from_probabilities(p);
    const DescendantSim sim = simulate_descendants(t, one_hot_distribution(3, 0), 3, 1, 7);
    CHECK(sim.coverage == doctest::Approx(2.0 / 3.0));
    CHECK(sim.unobserved_row_hits == 2); // steps 2 and 3 sat on row 1
}

TEST_CASE("coverage never decreases as U grows with a shared seed prefix") {
    Matrix p(3, 3);
    p << 0.2, 0.4, 0.4,
         0.3, 0.3, 0.4,
         0.5, 0.25, 0.25;
    const TransitionMatrix t = from_probabilities(p);
    const Vector d = Vector::Constant(3, 1.0 / 3.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        double previous = 0;
        for (int u = 1; u <= 6; ++u) {
            const double c = simulate_descendants(t, d, 2, u, seed).coverage;
            CHECK(c >= previous);
            previous = c;
        }
    }
}

TEST_CASE("mean coverage grows with l and U on strictly positive chains") {
    Matrix p(4, 4);
    p << 0.7, 0.1, 0.1, 0.1,
         0.1, 0.7, 0.1, 0.1,
         0.1, 0.1, 0.7, 0.1,
         0.1, 0.1, 0.1, 0.7;
    const TransitionMatrix t = from_probabilities(p);
    const Vector d = one_hot_distribution(4, 0);

    LEvolvabilityParams params;
    params.repeats = 20000;
    params.l = 1;
    params.u = 1;
    const LEvolvabilityEstimate base = l_evolvability_from_distribution(t, d, params, 5);
    params.l = 3;
    const LEvolvabilityEstimate longer = l_evolvability_from_distribution(t, d, params, 5);
    params.l = 1;
    params.u = 3;
    const LEvolvabilityEstimate wider = l_evolvability_from_distribution(t, d, params, 5);

    CHECK(longer.mean_coverage - base.mean_coverage >
          -3.0 * (longer.std_error + base.std_error));
    CHECK(longer.mean_coverage > base.mean_coverage);
    CHECK(wider.mean_coverage > base.mean_coverage);
}

TEST_CASE("outflow-rich niches score higher l-evolvability (comparator)") {
    // Niches 0,1 self-absorb; niches 2,3 spread uniformly. A solution
    // whose children sit in {2,3} must outrank one whose children sit
    // in {0,1} once grandchildren count (l = 2).
    const Index n = 6;
    Matrix p = Matrix::Zero(n, n);
    p(0, 0) = 1.0;
    p(1, 1) = 1.0;
    p.row(2).setConstant(1.0 / 6.0);
    p.row(3).setConstant(1.0 / 6.0);
    p(4, 4) = 1.0;
    p(5, 5) = 1.0;
    const TransitionMatrix t = from_probabilities(p);

    Vector d_a = Vector::Zero(n), d_b = Vector::Zero(n);
    d_a[0] = d_a[1] = 0.5;
    d_b[2] = d_b[3] = 0.5;

    LEvolvabilityParams params;
    params.l = 2;
    params.u = 2;
    params.repeats = 20000;
    const LEvolvabilityEstimate a = l_evolvability_from_distribution(t, d_a, params, 21);
    const LEvolvabilityEstimate b = l_evolvability_from_distribution(t, d_b, params, 22);
    const double separation = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(b.mean_coverage - a.mean_coverage > 5.0 * separation);
}

TEST_CASE("transition matrix text format round-trips") {
    const NetworkShape shape(9, {}, 2);
    const BehaviorFn phi =
        linear_landscape(coordinate_selector(2, shape.parameter_count()), Vector::Zero(2));
    const NicheGrid grid = NicheGrid::uniform(2, -2.0, 2.0, 4);
    MutationConfig mutation;
    mutation.scale = 0.3;
    mutation.offspring_count = 2;
    const TransitionMatrix t =
        estimate_transition_matrix(grid, phi, mutation, {xavier_init(shape, 2)}, 500, 31);

    std::stringstream stream;
    save_transition_matrix(stream, t);
    const TransitionMatrix back = load_transition_matrix(stream);

    REQUIRE(back.n() == t.n());
    CHECK(back.degenerate == t.degenerate);
    CHECK(back.visit_counts == t.visit_counts);
    for (Index i = 0; i < t.n(); ++i) {
        CHECK(back.row_observed[static_cast<std::size_t>(i)] ==
              t.row_observed[static_cast<std::size_t>(i)]);
        if (t.row_observed[static_cast<std::size_t>(i)])
            CHECK(back.probabilities.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
        for (Index j = 0; j < t.n(); ++j)
            CHECK(back.probabilities(i, j) == t.probabilities(i, j));
    }
}

TEST_CASE("identity transition: l-evolvability equals the coverage of D alone") {
    const Index n = 4;
    const TransitionMatrix t = from_probabilities(Matrix::Identity(n, n));
    const Vector d = one_hot_distribution(n, 1);
    LEvolvabilityParams params;
    params.l = 3;
    params.u = 2;
    params.repeats = 50;
    const LEvolvabilityEstimate estimate = l_evolvability_from_distribution(t, d, params, 77);
    CHECK(estimate.mean_coverage == 1.0 / static_cast<double>(n));
    CHECK(estimate.std_error == 0.0);
}
