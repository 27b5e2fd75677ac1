// Special functions and small numeric utilities used across the toolkit.
// Everything here is deterministic, header-only, and safe to call concurrently.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>

namespace occ {

inline double lgamma_safe(double x) {
    // std::lgamma is not guaranteed thread-safe because of signgam; we only
    // ever call it for x > 0 where the sign is +1, so a plain call is fine on
    // glibc, but keep the wrapper as the single point of use.
    return std::lgamma(x);
}

inline double log_factorial(unsigned n) { return lgamma_safe(double(n) + 1.0); }

inline double log_binomial(double n, double k) {
    return lgamma_safe(n + 1.0) - lgamma_safe(k + 1.0) - lgamma_safe(n - k + 1.0);
}

// Regularized lower incomplete gamma P(a,x); series for x < a+1, continued
// fraction for the complement otherwise (Numerical Recipes structure).
namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - lgamma_safe(a));
    }
    return sum * std::exp(-x + a * std::log(x) - lgamma_safe(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - lgamma_safe(a)) * h;
}

} // namespace detail

inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_contfrac(a, x);
}

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

// P{Poisson(m) >= j} = P(j, m) (regularized lower incomplete gamma).
inline double poisson_ccdf_geq(unsigned j, double m) {
    if (j == 0) return 1.0;
    if (m <= 0.0) return 0.0;
    return gamma_p(double(j), m);
}

// log of the Poisson pmf e^{-m} m^j / j!
inline double log_poisson_pmf(unsigned j, double m) {
    if (m <= 0.0) return j == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -m + double(j) * std::log(m) - log_factorial(j);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov asymptotic tail Q_KS with the Stephens finite-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
    double en = std::sqrt(double(n));
    double x = (en + 0.12 + 0.11 / en) * d;
    double sum = 0.0;
    double sign = 1.0;
    for (int m = 1; m <= 200; ++m) {
        double term = std::exp(-2.0 * double(m) * double(m) * x * x);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    double p = 2.0 * sum;
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

inline double chi2_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

// Adaptive Simpson quadrature with absolute tolerance.
namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}
inline double adsimp(const std::function<double(double)>& f, double a, double b,
                     double fa, double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, m, fa, flm, fm);
    double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adsimp(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adsimp(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
} // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adsimp(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace occ
