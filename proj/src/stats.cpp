#include <evoscape/stats.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace evoscape {

namespace {

constexpr int kMaxIterations = 500;
constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();
constexpr Scalar kTiny = 1e-300;

/// Series expansion of P(a, x), converges fast for x < a + 1.
Scalar gamma_p_series(Scalar a, Scalar x) {
    Scalar ap = a;
    Scalar sum = 1.0 / a;
    Scalar term = sum;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Lentz continued fraction for Q(a, x), converges fast for x > a + 1.
Scalar gamma_q_fraction(Scalar a, Scalar x) {
    Scalar b = x + 1.0 - a;
    Scalar c = 1.0 / kTiny;
    Scalar d = 1.0 / b;
    Scalar h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const Scalar an = -static_cast<Scalar>(i) * (static_cast<Scalar>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const Scalar delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps)
            break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Lentz continued fraction for the incomplete beta.
Scalar beta_fraction(Scalar a, Scalar b, Scalar x) {
    const Scalar qab = a + b;
    const Scalar qap = a + 1.0;
    const Scalar qam = a - 1.0;
    Scalar c = 1.0;
    Scalar d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    Scalar h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const Scalar m2 = 2.0 * m;
        Scalar aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const Scalar delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps)
            break;
    }
    return h;
}

} // namespace

Scalar regularized_gamma_p(Scalar a, Scalar x) {
    if (!(a > 0) || x < 0 || !std::isfinite(a) || !std::isfinite(x))
        throw std::invalid_argument("regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0)
        return 0;
    if (x < a + 1.0)
        return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

Scalar regularized_gamma_q(Scalar a, Scalar x) {
    if (!(a > 0) || x < 0 || !std::isfinite(a) || !std::isfinite(x))
        throw std::invalid_argument("regularized_gamma_q: need a > 0, x >= 0");
    if (x == 0)
        return 1;
    if (x < a + 1.0)
        return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

Scalar regularized_beta(Scalar a, Scalar b, Scalar x) {
    if (!(a > 0) || !(b > 0) || x < 0 || x > 1)
        throw std::invalid_argument("regularized_beta: need a, b > 0 and x in [0, 1]");
    if (x == 0) return 0;
    if (x == 1) return 1;
    const Scalar front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

Scalar chi_square_upper_tail(Scalar x, Scalar dof) {
    if (!(dof > 0))
        throw std::invalid_argument("chi_square_upper_tail: dof must be > 0");
    if (x <= 0)
        return 1;
    return regularized_gamma_q(dof / 2.0, x / 2.0);
}

Scalar student_t_two_sided_p(Scalar t, Scalar dof) {
    if (!(dof > 0))
        throw std::invalid_argument("student_t_two_sided_p: dof must be > 0");
    if (std::isinf(t))
        return 0;
    return regularized_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

Scalar student_t_cdf(Scalar t, Scalar dof) {
    const Scalar half_p = student_t_two_sided_p(std::abs(t), dof) / 2.0;
    return t >= 0 ? 1.0 - half_p : half_p;
}

Scalar student_t_quantile(Scalar p, Scalar dof) {
    if (!(p > 0 && p < 1))
        throw std::invalid_argument("student_t_quantile: p must be in (0, 1)");
    if (p == 0.5)
        return 0;
    if (p < 0.5)
        return -student_t_quantile(1.0 - p, dof);

    Scalar hi = 1.0;
    while (student_t_cdf(hi, dof) < p && hi < 1e300)
        hi *= 2.0;
    Scalar lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Scalar mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SeriesSummary summarize(const std::vector<Vector>& series) {
    if (series.empty())
        throw std::invalid_argument("summarize: no runs");
    const Index steps = series.front().size();
    for (const Vector& run : series)
        if (run.size() != steps)
            throw std::invalid_argument("summarize: ragged input");

    const int n = static_cast<int>(series.size());
    SeriesSummary summary;
    summary.run_count = n;
    summary.mean = Vector::Zero(steps);
    summary.ci95_half_width = Vector::Zero(steps);
    for (const Vector& run : series)
        summary.mean += run;
    summary.mean /= static_cast<Scalar>(n);

    if (n >= 2) {
        const Scalar tq = student_t_quantile(0.975, static_cast<Scalar>(n - 1));
        for (Index s = 0; s < steps; ++s) {
            Scalar ss = 0;
            for (const Vector& run : series)
                ss += (run[s] - summary.mean[s]) * (run[s] - summary.mean[s]);
            const Scalar sd = std::sqrt(ss / static_cast<Scalar>(n - 1));
            summary.ci95_half_width[s] = tq * sd / std::sqrt(static_cast<Scalar>(n));
        }
    }
    return summary;
}

std::vector<Scalar> average_ranks(const std::vector<Scalar>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<Scalar> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]])
            ++j;
        const Scalar shared = (static_cast<Scalar>(i) + static_cast<Scalar>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

Correlation spearman(const ConstVectorRef& x, const ConstVectorRef& y) {
    const Index n = x.size();
    if (n != y.size())
        throw std::invalid_argument("spearman: length mismatch");
    if (n < 3)
        throw std::invalid_argument("spearman: need at least 3 pairs");
    if ((x.array() == x[0]).all() || (y.array() == y[0]).all())
        throw std::invalid_argument("spearman: correlation undefined for constant input");

    const std::vector<Scalar> xv(x.data(), x.data() + n);
    const std::vector<Scalar> yv(y.data(), y.data() + n);
    const std::vector<Scalar> rx = average_ranks(xv);
    const std::vector<Scalar> ry = average_ranks(yv);

    const Scalar mean = (static_cast<Scalar>(n) + 1.0) / 2.0;
    Scalar sxy = 0, sxx = 0, syy = 0;
    for (Index i = 0; i < n; ++i) {
        const Scalar dx = rx[static_cast<std::size_t>(i)] - mean;
        const Scalar dy = ry[static_cast<std::size_t>(i)] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Correlation result;
    result.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

    const Scalar one_minus = 1.0 - result.rho * result.rho;
    if (one_minus <= 0) {
        result.p = 0;
    } else {
        const Scalar t = result.rho * std::sqrt(static_cast<Scalar>(n - 2) / one_minus);
        result.p = student_t_two_sided_p(t, static_cast<Scalar>(n - 2));
    }
    return result;
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<Scalar>>& groups) {
    if (groups.size() < 2)
        throw std::invalid_argument("kruskal_wallis: need at least 2 groups");
    std::vector<Scalar> pooled;
    for (const auto& g : groups) {
        if (g.empty())
            throw std::invalid_argument("kruskal_wallis: empty group");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    const Scalar n = static_cast<Scalar>(pooled.size());
    const std::vector<Scalar> ranks = average_ranks(pooled);

    Scalar stat = 0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        Scalar rank_sum = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            rank_sum += ranks[offset + i];
        stat += rank_sum * rank_sum / static_cast<Scalar>(g.size());
        offset += g.size();
    }
    Scalar h = 12.0 / (n * (n + 1.0)) * stat - 3.0 * (n + 1.0);

    // Tie correction; all-identical data has zero denominator -> H = 0.
    std::vector<Scalar> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    Scalar tie_sum = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i])
            ++j;
        const Scalar t = static_cast<Scalar>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    const Scalar correction = 1.0 - tie_sum / (n * n * n - n);

    KruskalWallisResult result;
    if (correction <= 0) {
        result.h = 0;
        result.p = 1;
        return result;
    }
    result.h = h / correction;
    if (result.h <= 0) {
        result.h = std::max(result.h, 0.0);
        result.p = 1;
        return result;
    }
    result.p = chi_square_upper_tail(result.h, static_cast<Scalar>(groups.size()) - 1.0);
    return result;
}

} // namespace evoscape
