#include <evoscape/markov.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace evoscape {

TransitionMatrix TransitionCounter::normalize() const {
    const Index n = counts_.rows();
    TransitionMatrix t;
    t.visit_counts = counts_;
    t.probabilities = Matrix::Zero(n, n);
    t.row_observed.assign(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < n; ++i) {
        const std::int64_t total = counts_.row(i).sum();
        if (total > 0) {
            t.row_observed[static_cast<std::size_t>(i)] = true;
            t.probabilities.row(i) = counts_.row(i).cast<Scalar>() / static_cast<Scalar>(total);
        }
    }
    return t;
}

TransitionMatrix estimate_transition_matrix(const NicheGrid& grid, const BehaviorFn& phi,
                                            const MutationConfig& mutation,
                                            const std::vector<Genotype>& initial_elites,
                                            Index budget, std::uint64_t seed) {
    if (initial_elites.empty())
        throw std::invalid_argument("estimate_transition_matrix: need at least one initial elite");
    const Index n = grid.total_cells();
    if (budget < n)
        throw std::invalid_argument("estimate_transition_matrix: budget must be >= total cells");

    std::map<Index, Genotype> elites;
    std::vector<Index> occupied; // discovery order, used for uniform picks
    for (const Genotype& g : initial_elites) {
        const Index cell = grid.cell_index(phi(g));
        if (elites.try_emplace(cell, g).second)
            occupied.push_back(cell);
    }

    TransitionCounter counter(n);
    Rng pick_rng(derive_seed(seed, stream::kMarkov));
    for (Index it = 0; it < budget; ++it) {
        std::uniform_int_distribution<std::size_t> pick(0, occupied.size() - 1);
        const Index parent_cell = occupied[pick(pick_rng)];
        const Genotype& parent = elites.at(parent_cell);

        Genotype child = mutate(parent, mutation, derive_seed(seed, stream::kMutation, static_cast<std::uint64_t>(it)));
        const Index child_cell = grid.cell_index(phi(child));
        counter.record(parent_cell, child_cell);
        if (elites.try_emplace(child_cell, std::move(child)).second)
            occupied.push_back(child_cell);
    }

    TransitionMatrix t = counter.normalize();
    t.degenerate = occupied.size() < 2;
    return t;
}

Vector child_distribution(const Genotype& g, const NicheGrid& grid, const BehaviorFn& phi,
                          const MutationConfig& mutation, Index sample_size, std::uint64_t seed) {
    if (sample_size < 1)
        throw std::invalid_argument("child_distribution: sample_size must be >= 1");
    Vector histogram = Vector::Zero(grid.total_cells());
    for (Index i = 0; i < sample_size; ++i) {
        const Genotype child = mutate(g, mutation, derive_seed(seed, static_cast<std::uint64_t>(i)));
        histogram[grid.cell_index(phi(child))] += 1.0;
    }
    return histogram / static_cast<Scalar>(sample_size);
}

Vector one_hot_distribution(Index n, Index niche) {
    if (niche < 0 || niche >= n)
        throw std::invalid_argument("one_hot_distribution: niche out of range");
    Vector d = Vector::Zero(n);
    d[niche] = 1.0;
    return d;
}

namespace {

Index sample_categorical(const ConstVectorRef& probs, Rng& rng) {
    std::uniform_real_distribution<Scalar> uniform(0.0, 1.0);
    const Scalar u = uniform(rng);
    Scalar acc = 0;
    for (Index i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc)
            return i;
    }
    // Rounding slack: fall back to the last state with positive mass.
    for (Index i = probs.size() - 1; i >= 0; --i)
        if (probs[i] > 0)
            return i;
    throw std::invalid_argument("sample_categorical: distribution has no mass");
}

} // namespace

DescendantSim simulate_descendants(const TransitionMatrix& t, const ConstVectorRef& initial,
                                   int l, int u, std::uint64_t seed) {
    if (l < 1 || u < 1)
        throw std::invalid_argument("simulate_descendants: l and u must be >= 1");
    if (initial.size() != t.n())
        throw std::invalid_argument("simulate_descendants: distribution size mismatch");

    const Index n = t.n();
    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    DescendantSim sim;
    Rng rng(seed);
    for (int walk = 0; walk < u; ++walk) {
        Index state = sample_categorical(initial, rng);
        visited[static_cast<std::size_t>(state)] = 1;
        for (int gen = 0; gen < l; ++gen) {
            if (t.row_observed[static_cast<std::size_t>(state)]) {
                state = sample_categorical(t.probabilities.row(state).transpose(), rng);
            } else {
                ++sim.unobserved_row_hits; // absorbing self-loop
            }
            visited[static_cast<std::size_t>(state)] = 1;
        }
    }
    Index count = 0;
    for (char v : visited)
        count += v;
    sim.coverage = static_cast<Scalar>(count) / static_cast<Scalar>(n);
    return sim;
}

LEvolvabilityEstimate l_evolvability_from_distribution(const TransitionMatrix& t,
                                                       const ConstVectorRef& initial,
                                                       const LEvolvabilityParams& params,
                                                       std::uint64_t seed) {
    if (params.repeats < 1)
        throw std::invalid_argument("l_evolvability: repeats must be >= 1");
    Vector coverages(params.repeats);
    for (int r = 0; r < params.repeats; ++r)
        coverages[r] = simulate_descendants(t, initial, params.l, params.u,
                                            derive_seed(seed, stream::kMarkov, static_cast<std::uint64_t>(r)))
                           .coverage;

    LEvolvabilityEstimate estimate;
    estimate.mean_coverage = coverages.mean();
    if (params.repeats > 1) {
        const Scalar var =
            (coverages.array() - estimate.mean_coverage).square().sum() / static_cast<Scalar>(params.repeats - 1);
        estimate.std_error = std::sqrt(var / static_cast<Scalar>(params.repeats));
    }
    estimate.l = params.l;
    estimate.u = params.u;
    estimate.repeats = params.repeats;
    return estimate;
}

LEvolvabilityEstimate l_evolvability(const Genotype& g, const NicheGrid& grid,
                                     const TransitionMatrix& t, const BehaviorFn& phi,
                                     const MutationConfig& mutation,
                                     const LEvolvabilityParams& params, std::uint64_t seed) {
    const Vector d = child_distribution(g, grid, phi, mutation, params.sample_size,
                                        derive_seed(seed, stream::kInit));
    return l_evolvability_from_distribution(t, d, params, seed);
}

namespace {

void write_scalar(std::ostream& out, Scalar v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
}

} // namespace

void save_transition_matrix(std::ostream& out, const TransitionMatrix& t) {
    const Index n = t.n();
    out << "evoscape-transition-matrix v1\n";
    out << "n " << n << "\n";
    out << "degenerate " << (t.degenerate ? 1 : 0) << "\n";
    out << "probabilities\n";
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (j) out << ' ';
            write_scalar(out, t.probabilities(i, j));
        }
        out << '\n';
    }
    out << "counts\n";
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (j) out << ' ';
            out << t.visit_counts(i, j);
        }
        out << '\n';
    }
}

TransitionMatrix load_transition_matrix(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "evoscape-transition-matrix v1")
        throw std::runtime_error("load_transition_matrix: bad header");

    std::string token;
    Index n = 0;
    int degenerate = 0;
    in >> token >> n;
    if (token != "n" || n < 1)
        throw std::runtime_error("load_transition_matrix: bad size");
    in >> token >> degenerate;
    if (token != "degenerate")
        throw std::runtime_error("load_transition_matrix: bad degenerate flag");
    in >> token;
    if (token != "probabilities")
        throw std::runtime_error("load_transition_matrix: missing probabilities");

    TransitionMatrix t;
    t.degenerate = degenerate != 0;
    t.probabilities.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (!(in >> t.probabilities(i, j)))
                throw std::runtime_error("load_transition_matrix: truncated probabilities");
    in >> token;
    if (token != "counts")
        throw std::runtime_error("load_transition_matrix: missing counts");
    t.visit_counts.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (!(in >> t.visit_counts(i, j)))
                throw std::runtime_error("load_transition_matrix: truncated counts");

    t.row_observed.assign(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < n; ++i)
        t.row_observed[static_cast<std::size_t>(i)] = t.probabilities.row(i).sum() > 0;
    return t;
}

} // namespace evoscape
