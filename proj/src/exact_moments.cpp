#include "occ/exact_moments.hpp"

#include "occ/mathfn.hpp"
#include "occ/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace occ {

namespace {

// Relative floor: an absolute tol of 1e-9 is below double rounding once the
// value itself is ~1e8, so the effective tolerance tracks the running value.
double effective_tol(double tol, double running_value) {
    return std::max(tol, 1e-12 * std::fabs(running_value));
}

constexpr std::int64_t kMaxDirectK = std::int64_t(1) << 33;

struct BoxSum {
    double value = 0.0;
    double error_bound = 0.0;
    std::int64_t k_truncation = 0;
};

// Sum g(k) over all boxes k >= 1.  `g` must accept real x >= 1 (continuous
// extension), be eventually decreasing once the per-box mean m(x) = p(x)·t
// drops below 1/2, and satisfy g <= 2·m there (true for all our terms).
// `t_like` is the Poisson time t or ball count n driving m.
BoxSum sum_boxes(const WeightModel& model, double t_like,
                 const std::function<double(double)>& g, double tol, bool parallel) {
    BoxSum out;
    if (model.is_finite()) {
        std::int64_t n = model.finite_size();
        out.value = chunked_sum(1, n + 1, [&](std::int64_t k) { return g(double(k)); },
                                parallel);
        out.k_truncation = n;
        return out;
    }

    const double logt = std::log(t_like);
    auto mean_at = [&](double x) { return std::exp(model.log_prob_continuous(x) + logt); };

    std::int64_t K = 0;
    double em_err = 0.0;
    while (true) {
        std::int64_t next = (K == 0) ? 4096 : K + std::max<std::int64_t>(4096, (K / 2) / 4096 * 4096);
        out.value += chunked_sum(K + 1, next + 1,
                                 [&](std::int64_t k) { return g(double(k)); }, parallel);
        K = next;
        double tol_eff = effective_tol(tol, out.value);
        double m = mean_at(double(K));
        if (m < 0.5) {
            // Midpoint Euler-Maclaurin discrepancy for a decreasing convex
            // tail is at most |g'|/24 at the cut; estimate by a difference
            // quotient with a generous safety factor.
            em_err = std::fabs(g(double(K)) - g(double(K + 1))) / 3.0;
            if (em_err <= tol_eff / 2.0) break;
        }
        if (K >= kMaxDirectK)
            throw std::runtime_error("sum_boxes: tolerance unachievable; best bound " +
                                     std::to_string(em_err));
    }

    double tol_eff = effective_tol(tol, out.value);
    // Close the tail in two pieces.  Numerically integrate g up to A, then
    // use that every term behaves like g = c·m + O(m²) once m is small
    // (c = lim g/m exists for all our terms: 1 for the j = 1 shapes, 0 for
    // j >= 2).  The remainder beyond A is c·t·(analytic tail mass at A) with
    // error at most 4·m(A)·t·tail_mass(A); push A out until that closes.
    // This matters for the alpha = 1 family, where t·tail_mass alone decays
    // only like 1/log A and a counting bound would never terminate.
    double A = double(2 * K);
    double closure;
    while (true) {
        closure = 4.0 * mean_at(A) * t_like *
                  model.tail_mass(std::int64_t(std::min(A, 9e18)));
        if (closure <= tol_eff / 4.0 || A > 1e30) break;
        A *= 2.0;
    }
    double quad_tol = tol_eff / 4.0;
    double a = double(K) + 0.5;
    double tail = integrate([&](double u) { return g(std::exp(u)) * std::exp(u); },
                            std::log(a), std::log(A), quad_tol);
    double mA = mean_at(A);
    double c_hat = mA > 0.0 ? g(A) / mA : 0.0;
    double remainder =
        c_hat * t_like * model.tail_mass(std::int64_t(std::min(A, 9e18)));
    out.value += tail + remainder;
    out.error_bound = em_err + quad_tol + closure;
    out.k_truncation = K;
    return out;
}

double log_binom_ull(std::uint64_t n, unsigned j) {
    return log_binomial(double(n), double(j));
}

} // namespace

MomentResult mean_poisson_exact(const WeightModel& model, unsigned j, double t,
                                CountKind kind, double tol, bool parallel) {
    if (!(t > 0.0)) throw std::domain_error("mean_poisson_exact: t must be > 0");
    if (j < 1) throw std::domain_error("mean_poisson_exact: j must be >= 1");
    const double logt = std::log(t);
    const double lfj = log_factorial(j);
    std::function<double(double)> g;
    if (kind == CountKind::ExactlyJ) {
        g = [&model, j, logt, lfj](double x) {
            double lm = model.log_prob_continuous(x) + logt;
            return std::exp(double(j) * lm - std::exp(lm) - lfj);
        };
    } else {
        g = [&model, j, logt](double x) {
            double m = std::exp(model.log_prob_continuous(x) + logt);
            return poisson_ccdf_geq(j, m);
        };
    }
    BoxSum s = sum_boxes(model, t, g, tol, parallel);
    return {s.value, s.error_bound, s.k_truncation, 0.0, false};
}

MomentResult var_poisson_exact(const WeightModel& model, unsigned j, double t,
                               CountKind kind, double tol, bool parallel) {
    if (!(t > 0.0)) throw std::domain_error("var_poisson_exact: t must be > 0");
    if (j < 1) throw std::domain_error("var_poisson_exact: j must be >= 1");
    const double logt = std::log(t);
    const double lfj = log_factorial(j);
    std::function<double(double)> g;
    if (kind == CountKind::ExactlyJ) {
        g = [&model, j, logt, lfj](double x) {
            double lm = model.log_prob_continuous(x) + logt;
            double pi = std::exp(double(j) * lm - std::exp(lm) - lfj);
            return pi * (1.0 - pi);
        };
    } else {
        g = [&model, j, logt](double x) {
            double m = std::exp(model.log_prob_continuous(x) + logt);
            double q = poisson_ccdf_geq(j, m);
            return q * (1.0 - q);
        };
    }
    BoxSum s = sum_boxes(model, t, g, tol, parallel);
    return {s.value, s.error_bound, s.k_truncation, 0.0, false};
}

MomentResult var_identity_rhs(const WeightModel& model, unsigned j, double t, double tol,
                              bool parallel) {
    MomentResult m1 = mean_poisson_exact(model, j, t, CountKind::ExactlyJ, tol, parallel);
    MomentResult m2 =
        mean_poisson_exact(model, 2 * j, 2.0 * t, CountKind::ExactlyJ, tol, parallel);
    double w = std::exp(log_binomial(2.0 * j, double(j)) - 2.0 * double(j) * std::log(2.0));
    MomentResult out;
    out.value = m1.value - w * m2.value;
    out.error_bound = m1.error_bound + w * m2.error_bound;
    out.k_truncation = std::max(m1.k_truncation, m2.k_truncation);
    return out;
}

MomentResult mean_binomial_exact(const WeightModel& model, unsigned j, std::uint64_t n,
                                 double tol, bool parallel) {
    if (n < j) throw std::domain_error("mean_binomial_exact: need n >= j");
    if (j < 1) throw std::domain_error("mean_binomial_exact: j must be >= 1");
    const double lC = log_binom_ull(n, j);
    const double nd = double(n), jd = double(j);
    auto g = [&model, lC, nd, jd](double x) {
        double lp = model.log_prob_continuous(x);
        double p = std::exp(lp);
        if (p >= 1.0) return 0.0;
        return std::exp(lC + jd * lp + (nd - jd) * std::log1p(-p));
    };
    BoxSum s = sum_boxes(model, double(n), g, tol, parallel);
    return {s.value, s.error_bound, s.k_truncation, 0.0, false};
}

MomentResult var_binomial_exact(const WeightModel& model, unsigned j, std::uint64_t n,
                                std::int64_t k_cap, double tol, bool parallel) {
    if (n < 2 * std::uint64_t(j)) {
        // Two boxes cannot both hold exactly j balls, so the count is an
        // indicator: Var = E(1 - E).
        MomentResult mean = mean_binomial_exact(model, j, n, tol, parallel);
        MomentResult out = mean;
        out.value = mean.value * (1.0 - mean.value);
        out.error_bound = mean.error_bound * (1.0 + 2.0 * mean.value);
        return out;
    }
    const double nd = double(n), jd = double(j);
    const double lC = log_binom_ull(n, j);
    const double lC2 = lC + log_binom_ull(n - j, j);

    auto P_of = [&](double lp, double p) {
        if (p >= 1.0) return 0.0;
        return std::exp(lC + jd * lp + (nd - jd) * std::log1p(-p));
    };

    // Diagonal: Σ P_k (1 - P_k), certified.
    auto gdiag = [&](double x) {
        double lp = model.log_prob_continuous(x);
        double P = P_of(lp, std::exp(lp));
        return P * (1.0 - P);
    };
    BoxSum diag = sum_boxes(model, double(n), gdiag, tol, parallel);

    // Exact cross-sum over pairs i < k <= k_cap.
    if (model.is_finite()) k_cap = std::min(k_cap, model.finite_size());
    std::vector<double> p(std::size_t(k_cap), 0.0);
    std::vector<double> lp(std::size_t(k_cap), 0.0);
    std::vector<double> P(std::size_t(k_cap), 0.0);
    for (std::int64_t i = 0; i < k_cap; ++i) {
        lp[std::size_t(i)] = model.log_prob(i + 1);
        p[std::size_t(i)] = std::exp(lp[std::size_t(i)]);
        P[std::size_t(i)] = P_of(lp[std::size_t(i)], p[std::size_t(i)]);
    }
    const double n2j = nd - 2.0 * jd;
    double cross = chunked_sum(
        0, k_cap,
        [&](std::int64_t i) {
            double s = 0.0;
            const double pi_ = p[std::size_t(i)], lpi = lp[std::size_t(i)],
                         Pi = P[std::size_t(i)];
            for (std::int64_t k = i + 1; k < k_cap; ++k) {
                double rest = 1.0 - pi_ - p[std::size_t(k)];
                double Pik;
                if (rest > 0.0)
                    Pik = std::exp(lC2 + jd * (lpi + lp[std::size_t(k)]) +
                                   n2j * std::log1p(-pi_ - p[std::size_t(k)]));
                else if (rest == 0.0 && n2j == 0.0)
                    Pik = std::exp(lC2 + jd * (lpi + lp[std::size_t(k)]));
                else
                    Pik = 0.0;
                s += 2.0 * (Pik - Pi * P[std::size_t(k)]);
            }
            return s;
        },
        parallel);

    // Uncertified residual for pairs beyond k_cap, from the small-p expansion
    //   P_ik/(P_i P_k) - 1 ≈ j(p_i+p_k) - n·p_i·p_k - j²/n,
    // which factorizes into 1-D sums S_P = Σ P_k and S_Pp = Σ P_k p_k.
    auto gPp = [&](double x) {
        double lp_ = model.log_prob_continuous(x);
        double p_ = std::exp(lp_);
        return P_of(lp_, p_) * p_;
    };
    BoxSum SPall = sum_boxes(model, double(n), [&](double x) {
        double lp_ = model.log_prob_continuous(x);
        return P_of(lp_, std::exp(lp_));
    }, tol, parallel);
    BoxSum SPpall = sum_boxes(model, double(n), gPp, tol, parallel);
    double SP0 = 0.0, SPp0 = 0.0;
    for (std::int64_t i = 0; i < k_cap; ++i) {
        SP0 += P[std::size_t(i)];
        SPp0 += P[std::size_t(i)] * p[std::size_t(i)];
    }
    auto Tpair = [&](double SP, double SPp) {
        return 2.0 * jd * SP * SPp - nd * SPp * SPp - (jd * jd / nd) * SP * SP;
    };
    // Difference counts exactly the ordered pairs with max(i,k) > k_cap
    // (plus a negligible i == k sliver out there).
    double residual = Tpair(SPall.value, SPpall.value) - Tpair(SP0, SPp0);

    MomentResult out;
    out.value = diag.value + cross;
    out.error_bound = diag.error_bound;
    out.k_truncation = std::max(diag.k_truncation, k_cap);
    out.residual_estimate = residual;
    out.warning = std::fabs(residual) > std::max(100.0 * tol, 1e-6 * std::fabs(out.value));
    return out;
}

double var_poisson_window(const WeightModel& model, unsigned j, double t, double lo,
                          double hi, bool parallel) {
    std::int64_t a = lo > 0.0 ? model.rho(lo) : 0;
    std::int64_t b = model.rho(hi);
    const double logt = std::log(t);
    const double lfj = log_factorial(j);
    return chunked_sum(
        a + 1, b + 1,
        [&](std::int64_t k) {
            double lm = model.log_prob(k) + logt;
            double pi = std::exp(double(j) * lm - std::exp(lm) - lfj);
            return pi * (1.0 - pi);
        },
        parallel);
}

} // namespace occ
