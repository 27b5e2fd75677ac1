// Weight families (p_k) realizing the regularity regimes, with exact counting
// function rho and analytic tail bounds.
//
// Families (parameters dimensionless):
//   pipolylog:beta=B     p_k ∝ exp(-k^{1/(B+1)})        rho(t) ~ (log t)^{B+1}
//   pistretch:sigma,lambda   1/p_k = W·e^{v_k}, v_k = R^{-1}(k),
//                        R(v) = ∫_0^v e^{sigma·u^lambda} du
//   zipf:alpha=A         p_k = k^{-1/A}/zeta(1/A)       rho(t) ~ (t/Z)^A
//   alpha1logsq:c=C      p_k ∝ 1/(k·log²(k+2))          alpha = 1 regime
//                        (C cancels under normalization; kept for the CLI
//                        grammar, the effective constant is 1/W)
// plus an internal finite family (explicit probability list) used by tests.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace occ {

enum class Family { PiPolyLog, PiStretchedExp, Zipf, AlphaOneLogSq, Finite };

struct FamilyParams {
    double beta = 0.0;   // PiPolyLog
    double sigma = 0.0;  // PiStretchedExp
    double lambda = 0.0; // PiStretchedExp
    double alpha = 0.0;  // Zipf
    double c = 0.0;      // AlphaOneLogSq (nominal; cancels)
};

class WeightModel {
public:
    static WeightModel pipolylog(double beta);
    static WeightModel pistretch(double sigma, double lambda);
    static WeightModel zipf(double alpha);
    static WeightModel alpha1logsq(double c);
    static WeightModel finite(std::vector<double> probs); // need not be normalized
    // Parses the CLI grammar, e.g. "zipf:alpha=0.5", "pipolylog:beta=2".
    static WeightModel parse(const std::string& spec);

    Family family() const { return family_; }
    const FamilyParams& params() const { return params_; }
    std::string spec_string() const;

    // Normalizing constant W: p_k = w_k / W with w_k the unnormalized weight
    // (for Zipf, W = zeta(1/alpha)).
    double normalizer() const { return norm_; }

    double prob(std::int64_t k) const;     // p_k, k >= 1
    double log_prob(std::int64_t k) const; // log p_k
    // Continuous extension log p(x) for real x >= 1 (used by certified tail
    // integrals); agrees with log_prob at integer x.
    double log_prob_continuous(double x) const;

    // Exact #{k : 1/p_k <= t}.
    std::int64_t rho(double t) const;

    // Upper bound on the tail mass sum_{k>k0} p_k (analytic integral bound).
    double tail_mass(std::int64_t k0) const;

    // Prefix mass P_k = sum_{i<=k} p_i, from a lazily extended cache.
    double prefix_mass(std::int64_t k) const;

    bool is_finite() const { return family_ == Family::Finite; }
    std::int64_t finite_size() const;

    // PiStretchedExp only: v_k = R^{-1}(k) for real k >= 0 (v(0) = 0).
    double stretch_v(double k) const;

private:
    WeightModel() = default;
    double unnorm_log_weight(double x) const; // log w(x), continuous
    void ensure_cache(std::int64_t k) const;

    Family family_ = Family::Finite;
    FamilyParams params_{};
    double norm_ = 1.0;
    std::vector<double> finite_probs_;

    // Lazily grown monotone tables; idempotent fill, guarded for concurrent
    // readers by being append-only behind a mutex (see .cpp).
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

} // namespace occ
