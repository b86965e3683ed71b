#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <evoscape/mutation.hpp>
#include <evoscape/niche_grid.hpp>
#include <evoscape/types.hpp>

namespace evoscape {

/// Row-stochastic niche-to-niche child placement probabilities plus the
/// raw observation counts they were normalized from. Rows with no
/// observations stay zero and are flagged unobserved.
struct TransitionMatrix {
    Matrix probabilities;
    MatrixI visit_counts;
    std::vector<bool> row_observed;
    bool degenerate = false; // estimation discovered < 2 cells

    Index n() const { return probabilities.rows(); }
};

/// Incremental (parent niche -> child niche) tally; normalize() turns
/// the counts collected so far into a TransitionMatrix. Usable online,
/// outside the batch estimator.
class TransitionCounter {
public:
    explicit TransitionCounter(Index n) : counts_(MatrixI::Zero(n, n)) {}

    void record(Index from, Index to) { ++counts_(from, to); }
    const MatrixI& counts() const { return counts_; }
    TransitionMatrix normalize() const;

private:
    MatrixI counts_;
};

/// MAP-Elites-style estimation: keep one elite per discovered niche;
/// each iteration mutates the elite of a random occupied niche, tallies
/// the (parent niche -> child niche) transition, and claims the child's
/// niche if it is empty. `initial_elites` seed the grid and must be
/// non-empty.
TransitionMatrix estimate_transition_matrix(const NicheGrid& grid, const BehaviorFn& phi,
                                            const MutationConfig& mutation,
                                            const std::vector<Genotype>& initial_elites,
                                            Index budget, std::uint64_t seed);

/// Empirical niche distribution of `sample_size` mutants of g.
Vector child_distribution(const Genotype& g, const NicheGrid& grid, const BehaviorFn& phi,
                          const MutationConfig& mutation, Index sample_size, std::uint64_t seed);

/// Initial distribution for the evolvability of a single niche.
Vector one_hot_distribution(Index n, Index niche);

struct DescendantSim {
    Scalar coverage = 0;                 // distinct states visited / n
    std::int64_t unobserved_row_hits = 0; // times a chain sat on an unobserved row
};

/// U independent chains of l+1 states: initial state ~ initial,
/// transitions ~ T. Unobserved rows absorb (self-loop) and are counted.
DescendantSim simulate_descendants(const TransitionMatrix& t, const ConstVectorRef& initial,
                                   int l, int u, std::uint64_t seed);

struct LEvolvabilityParams {
    int l = 2;
    int u = 10;
    int repeats = 200;
    Index sample_size = 100;
};

struct LEvolvabilityEstimate {
    Scalar mean_coverage = 0;
    Scalar std_error = 0;
    int l = 0;
    int u = 0;
    int repeats = 0;
};

/// Mean and standard error of the descendant coverage over independent
/// repeats, starting from the given initial niche distribution.
LEvolvabilityEstimate l_evolvability_from_distribution(const TransitionMatrix& t,
                                                       const ConstVectorRef& initial,
                                                       const LEvolvabilityParams& params,
                                                       std::uint64_t seed);

/// Same, with the initial distribution estimated from g's children.
LEvolvabilityEstimate l_evolvability(const Genotype& g, const NicheGrid& grid,
                                     const TransitionMatrix& t, const BehaviorFn& phi,
                                     const MutationConfig& mutation,
                                     const LEvolvabilityParams& params, std::uint64_t seed);

// Structured text format: probabilities and counts, row-major. Row
// stochasticity survives the round trip (values print exactly).
void save_transition_matrix(std::ostream& out, const TransitionMatrix& t);
TransitionMatrix load_transition_matrix(std::istream& in);

} // namespace evoscape
