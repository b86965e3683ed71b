#pragma once

#include <vector>

#include <evoscape/types.hpp>

namespace evoscape {

// Special functions, self-contained so the statistics carry no external
// dependency. Absolute accuracy is ~1e-14, comfortably inside the 1e-10
// budget the p-values need.

/// Lower regularized incomplete gamma P(a, x).
Scalar regularized_gamma_p(Scalar a, Scalar x);
/// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
Scalar regularized_gamma_q(Scalar a, Scalar x);
/// Regularized incomplete beta I_x(a, b).
Scalar regularized_beta(Scalar a, Scalar b, Scalar x);

Scalar chi_square_upper_tail(Scalar x, Scalar dof);
Scalar student_t_cdf(Scalar t, Scalar dof);
Scalar student_t_two_sided_p(Scalar t, Scalar dof);
/// Inverse CDF; p in (0, 1).
Scalar student_t_quantile(Scalar p, Scalar dof);

/// Per-step mean and t-based 95% confidence half-width over runs.
struct SeriesSummary {
    Vector mean;
    Vector ci95_half_width;
    int run_count = 0;
};

SeriesSummary summarize(const std::vector<Vector>& series);

/// Average ranks (1-based), ties get the mean of their rank span.
std::vector<Scalar> average_ranks(const std::vector<Scalar>& values);

struct Correlation {
    Scalar rho = 0;
    Scalar p = 1;
};

/// Spearman rank-order correlation with average-rank ties; p from the
/// t approximation with n - 2 dof. Throws on a constant input vector.
Correlation spearman(const ConstVectorRef& x, const ConstVectorRef& y);

struct KruskalWallisResult {
    Scalar h = 0;
    Scalar p = 1;
};

/// Kruskal-Wallis H with tie correction; p from chi-square with
/// (groups - 1) dof. All-identical data yields H = 0, p = 1.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<Scalar>>& groups);

} // namespace evoscape
