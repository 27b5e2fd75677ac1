// Exact (truncated-series, error-certified) means and variances of the
// small-count statistics, in both the Poissonized and fixed-n schemes.
//
// Every infinite sum over boxes is evaluated as a direct prefix sum plus a
// certified tail: the tail Σ_{k>K} g(k) is replaced by the midpoint integral
// ∫_{K+1/2}^∞ g(x) dx (computed by adaptive quadrature in log-x), whose
// Euler–Maclaurin discrepancy is bounded numerically and folded into the
// reported error_bound.  The prefix is extended until the per-box Poisson
// mean has dropped past the mode and the bound meets the tolerance.
#pragma once

#include "occ/weights.hpp"

#include <cstdint>

namespace occ {

enum class CountKind { ExactlyJ, AtLeastJ };

struct MomentResult {
    double value = 0.0;
    double error_bound = 0.0;       // certified absolute bound
    std::int64_t k_truncation = 0;  // last box summed directly
    double residual_estimate = 0.0; // uncertified part (cross-sum only)
    bool warning = false;           // k_cap likely too small for tol
};

inline constexpr double kDefaultMomentTol = 1e-9;

// E K_j*(t) (ExactlyJ) or E K_j(t) (AtLeastJ).
MomentResult mean_poisson_exact(const WeightModel& model, unsigned j, double t,
                                CountKind kind = CountKind::ExactlyJ,
                                double tol = kDefaultMomentTol, bool parallel = true);

// Var K_j*(t) (ExactlyJ) or Var K_j(t) (AtLeastJ); per-box indicators are
// independent under Poissonization, so both are sums of Bernoulli variances.
MomentResult var_poisson_exact(const WeightModel& model, unsigned j, double t,
                               CountKind kind = CountKind::ExactlyJ,
                               double tol = kDefaultMomentTol, bool parallel = true);

// Right-hand side of the variance identity:
//   Var K_j*(t) = E K_j*(t) - 2^{-2j}·C(2j,j)·E K*_{2j}(2t).
MomentResult var_identity_rhs(const WeightModel& model, unsigned j, double t,
                              double tol = kDefaultMomentTol, bool parallel = true);

// E 𝒦_j*(n) = Σ_k C(n,j) p_k^j (1-p_k)^{n-j}.
MomentResult mean_binomial_exact(const WeightModel& model, unsigned j, std::uint64_t n,
                                 double tol = kDefaultMomentTol, bool parallel = true);

// Var 𝒦_j*(n): certified diagonal + O(k_cap²) pairwise cross-sum with an
// uncertified analytic residual estimate for the omitted pairs.
MomentResult var_binomial_exact(const WeightModel& model, unsigned j, std::uint64_t n,
                                std::int64_t k_cap = 20000,
                                double tol = kDefaultMomentTol, bool parallel = true);

// Variance contribution of boxes with 1/p_k in (lo, hi]; used for the
// window-concentration experiment.  Returns a plain sum (the box range is
// finite and summed exactly).
double var_poisson_window(const WeightModel& model, unsigned j, double t, double lo,
                          double hi, bool parallel = true);

} // namespace occ
