#include "occ/rng.hpp"

#include "occ/mathfn.hpp"

#include <algorithm>

namespace occ {

namespace {

// Inversion by sequential search; fine for mean < ~10.
std::uint64_t poisson_inversion(RngStream& rng, double mean) {
    double L = std::exp(-mean);
    double p = 1.0;
    std::uint64_t k = 0;
    double u = rng.next_double();
    // Invariant: u compared against the running cdf via product form.
    double cdf = 0.0;
    while (true) {
        p = (k == 0) ? L : p * mean / double(k);
        cdf += p;
        if (u <= cdf || k > 1000 + 20 * std::uint64_t(mean)) return k;
        ++k;
    }
}

// Hörmann (1993) PTRS transformed rejection for Poisson, mean >= 10.
std::uint64_t poisson_ptrs(RngStream& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        double u = rng.next_double() - 0.5;
        double v = rng.next_double();
        double us = 0.5 - std::fabs(u);
        double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return std::uint64_t(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            kd * loglam - mean - lgamma_safe(kd + 1.0))
            return std::uint64_t(kd);
    }
}

std::uint64_t binomial_binv(RngStream& rng, std::uint64_t n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    double f = std::pow(q, double(n));
    double u = rng.next_double();
    double cdf = 0.0;
    std::uint64_t k = 0;
    while (true) {
        cdf += f;
        if (u <= cdf || k >= n) return k;
        f *= s * double(n - k) / double(k + 1);
        ++k;
    }
}

// Hörmann (1993) BTRS transformed rejection for binomial, n·p >= 10, p <= 1/2.
std::uint64_t binomial_btrs(RngStream& rng, std::uint64_t n, double p) {
    const double nd = double(n);
    const double q = 1.0 - p;
    const double spq = std::sqrt(nd * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor((nd + 1.0) * p);
    const double h = lgamma_safe(m + 1.0) + lgamma_safe(nd - m + 1.0);
    while (true) {
        double u = rng.next_double() - 0.5;
        double v = rng.next_double();
        double us = 0.5 - std::fabs(u);
        double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        if (us >= 0.07 && v <= vr) return std::uint64_t(kd);
        v = std::log(v * alpha / (a / (us * us) + b));
        if (v <= h - lgamma_safe(kd + 1.0) - lgamma_safe(nd - kd + 1.0) +
                     (kd - m) * lpq)
            return std::uint64_t(kd);
    }
}

} // namespace

std::uint64_t poisson_draw(RngStream& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(rng, mean);
    return poisson_ptrs(rng, mean);
}

std::uint64_t binomial_draw(RngStream& rng, std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial_draw(rng, n, 1.0 - p);
    if (double(n) * p < 10.0) return binomial_binv(rng, n, p);
    return binomial_btrs(rng, n, p);
}

} // namespace occ
