#include "occ/weights.hpp"

#include "occ/mathfn.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace occ {

struct WeightModel::Cache {
    // Recursive: prefix_mass -> prob -> stretch_v re-enters for PiStretchedExp.
    mutable std::recursive_mutex mu;
    std::vector<double> prefix; // prefix[i] = P_{i+1}
    std::vector<double> v;      // PiStretchedExp: v[i] = v_{i+1} = R^{-1}(i+1)
};

namespace {

double parse_param(const std::string& kvs, const std::string& key) {
    // kvs like "sigma=1,lambda=0.5"
    std::stringstream ss(kvs);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad family param: " + item);
        if (item.substr(0, eq) == key) return std::stod(item.substr(eq + 1));
    }
    throw std::invalid_argument("missing family param: " + key);
}

} // namespace

double WeightModel::unnorm_log_weight(double x) const {
    switch (family_) {
    case Family::PiPolyLog:
        return -std::pow(x, 1.0 / (params_.beta + 1.0));
    case Family::PiStretchedExp:
        return -stretch_v(x);
    case Family::Zipf:
        return -(1.0 / params_.alpha) * std::log(x);
    case Family::AlphaOneLogSq: {
        double ll = std::log(x + 2.0);
        return -std::log(x) - 2.0 * std::log(ll);
    }
    case Family::Finite: {
        auto k = std::int64_t(x);
        if (k < 1 || std::size_t(k) > finite_probs_.size())
            return -std::numeric_limits<double>::infinity();
        return std::log(finite_probs_[std::size_t(k - 1)]);
    }
    }
    return 0.0;
}

double WeightModel::log_prob(std::int64_t k) const { return log_prob_continuous(double(k)); }

double WeightModel::log_prob_continuous(double x) const {
    return unnorm_log_weight(x) - std::log(norm_);
}

double WeightModel::prob(std::int64_t k) const {
    if (k < 1) throw std::domain_error("prob: k must be >= 1");
    if (family_ == Family::Finite) {
        if (std::size_t(k) > finite_probs_.size()) return 0.0;
        return finite_probs_[std::size_t(k - 1)] / norm_;
    }
    return std::exp(log_prob(k));
}

std::int64_t WeightModel::finite_size() const { return std::int64_t(finite_probs_.size()); }

// ---------------------------------------------------------------------------
// PiStretchedExp: v_k solves R(v) = k with R(v) = ∫_0^v e^{sigma·u^lambda} du.
// The cache holds v_1, v_2, ...; each new v_k is a Newton solve seeded from
// the previous one (R' = e^{sigma·v^lambda}).

namespace {

double stretch_integrand(double sigma, double lambda, double u) {
    return std::exp(sigma * std::pow(u, lambda));
}

// Newton solve for R(v) = target given a known anchor (v0, R(v0) = r0).
double stretch_newton(double sigma, double lambda, double v0, double r0, double target) {
    double v = v0;
    double r = r0;
    for (int it = 0; it < 100; ++it) {
        double deriv = stretch_integrand(sigma, lambda, v);
        double step = (target - r) / deriv;
        double vn = v + step;
        if (vn < 0.0) vn = 0.5 * v;
        r += integrate([&](double u) { return stretch_integrand(sigma, lambda, u); }, v, vn,
                       1e-14);
        v = vn;
        if (std::fabs(target - r) < 1e-13 * std::max(1.0, target)) break;
    }
    return v;
}

} // namespace

double WeightModel::stretch_v(double x) const {
    if (family_ != Family::PiStretchedExp)
        throw std::domain_error("stretch_v: wrong family");
    if (x <= 0.0) return 0.0;
    const double sigma = params_.sigma, lambda = params_.lambda;
    auto k = std::int64_t(std::floor(x));
    {
        std::lock_guard<std::recursive_mutex> lock(cache_->mu);
        auto& v = cache_->v;
        while (std::int64_t(v.size()) < k) {
            double v0 = v.empty() ? 0.0 : v.back();
            double r0 = double(v.size());
            v.push_back(stretch_newton(sigma, lambda, v0, r0, r0 + 1.0));
        }
        if (double(k) == x && k >= 1) return v[std::size_t(k - 1)];
        double v0 = (k >= 1) ? v[std::size_t(k - 1)] : 0.0;
        return stretch_newton(sigma, lambda, v0, double(k), x);
    }
}

// ---------------------------------------------------------------------------
// Construction / normalization.
//
// W = sum of unnormalized weights, computed as a direct prefix plus a
// certified tail: midpoint integral ∫_{K+1/2}^∞ w(x) dx whose Euler–Maclaurin
// error is bounded by |w'(K+1/2)|/24 (w decreasing convex in the tail).

namespace {
constexpr double kNormTol = 1e-15;
}

static double tail_integral_pipolylog(double beta, double a) {
    // ∫_a^∞ exp(-x^{1/(beta+1)}) dx = (beta+1)·Γ(beta+1)·Q(beta+1, a^{1/(beta+1)})
    double bp1 = beta + 1.0;
    return bp1 * std::exp(lgamma_safe(bp1)) * gamma_q(bp1, std::pow(a, 1.0 / bp1));
}

static double tail_integral_alpha1(double a) {
    // ∫_a^∞ dx / (x·log²(x+2)), via y = log(x+2):
    //   ∫_Y^∞ dy / (y²(1-2e^{-y})) = 1/Y + ∫_Y^∞ (1/y²)·2e^{-y}/(1-2e^{-y}) dy
    double Y = std::log(a + 2.0);
    double corr = integrate(
        [](double y) {
            double e = 2.0 * std::exp(-y);
            return e / (y * y * (1.0 - e));
        },
        Y, Y + 60.0, 1e-16);
    return 1.0 / Y + corr;
}

static double tail_integral_zipf(double s, double a) { return std::pow(a, 1.0 - s) / (s - 1.0); }

WeightModel WeightModel::pipolylog(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("pipolylog: beta must be > 0");
    WeightModel m;
    m.family_ = Family::PiPolyLog;
    m.params_.beta = beta;
    m.cache_ = std::make_shared<Cache>();
    double sum = 0.0;
    std::int64_t K = 1024;
    for (std::int64_t k = 1;; ++k) {
        sum += std::exp(m.unnorm_log_weight(double(k)));
        if (k == K) {
            double a = double(K) + 0.5;
            double w = std::exp(m.unnorm_log_weight(a));
            double em_err = w * std::pow(a, -beta / (beta + 1.0)) / (beta + 1.0) / 24.0;
            if (em_err < kNormTol * sum || K >= (std::int64_t(1) << 26)) {
                sum += tail_integral_pipolylog(beta, a);
                break;
            }
            K *= 2;
        }
    }
    m.norm_ = sum;
    return m;
}

WeightModel WeightModel::pistretch(double sigma, double lambda) {
    if (!(sigma > 0.0) || !(lambda > 0.0) || !(lambda < 1.0))
        throw std::invalid_argument("pistretch: need sigma > 0, lambda in (0,1)");
    WeightModel m;
    m.family_ = Family::PiStretchedExp;
    m.params_.sigma = sigma;
    m.params_.lambda = lambda;
    m.cache_ = std::make_shared<Cache>();
    m.norm_ = 1.0; // so stretch_v/tail bounds below see the raw weights
    double sum = 0.0;
    for (std::int64_t k = 1; k <= (std::int64_t(1) << 22); ++k) {
        double w = std::exp(m.unnorm_log_weight(double(k)));
        sum += w;
        double vk = m.stretch_v(double(k));
        double slope = sigma * lambda * std::pow(vk, lambda - 1.0);
        if (k >= 8 && slope < 0.5) {
            // tail ≤ ∫_k^∞ e^{-v(x)} dx = ∫_{v_k}^∞ e^{-v+sigma·v^lambda} dv
            //      ≤ e^{-v_k+sigma·v_k^lambda} / (1-slope)   (concavity of v^lambda)
            double bound = std::exp(-vk + sigma * std::pow(vk, lambda)) / (1.0 - slope);
            if (bound < kNormTol * sum) break;
        }
    }
    m.norm_ = sum;
    return m;
}

WeightModel WeightModel::zipf(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("zipf: alpha in (0,1)");
    WeightModel m;
    m.family_ = Family::Zipf;
    m.params_.alpha = alpha;
    m.cache_ = std::make_shared<Cache>();
    const double s = 1.0 / alpha;
    double sum = 0.0;
    std::int64_t K = 1024;
    for (std::int64_t k = 1;; ++k) {
        sum += std::pow(double(k), -s);
        if (k == K) {
            double a = double(K) + 0.5;
            double em_err = s * std::pow(a, -s - 1.0) / 24.0;
            if (em_err < kNormTol * sum || K >= (std::int64_t(1) << 26)) {
                sum += tail_integral_zipf(s, a);
                break;
            }
            K *= 2;
        }
    }
    m.norm_ = sum;
    return m;
}

WeightModel WeightModel::alpha1logsq(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("alpha1logsq: c must be > 0");
    WeightModel m;
    m.family_ = Family::AlphaOneLogSq;
    m.params_.c = c;
    m.cache_ = std::make_shared<Cache>();
    const std::int64_t K = std::int64_t(1) << 22;
    double sum = 0.0;
    for (std::int64_t k = 1; k <= K; ++k) {
        double ll = std::log(double(k) + 2.0);
        sum += 1.0 / (double(k) * ll * ll);
    }
    sum += tail_integral_alpha1(double(K) + 0.5);
    m.norm_ = sum;
    return m;
}

WeightModel WeightModel::finite(std::vector<double> probs) {
    if (probs.empty()) throw std::invalid_argument("finite: empty probability list");
    WeightModel m;
    m.family_ = Family::Finite;
    m.cache_ = std::make_shared<Cache>();
    double sum = 0.0;
    for (double p : probs) {
        if (!(p > 0.0)) throw std::invalid_argument("finite: probs must be positive");
        sum += p;
    }
    m.finite_probs_ = std::move(probs);
    m.norm_ = sum;
    return m;
}

WeightModel WeightModel::parse(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::string kvs = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "pipolylog") return pipolylog(parse_param(kvs, "beta"));
    if (name == "pistretch")
        return pistretch(parse_param(kvs, "sigma"), parse_param(kvs, "lambda"));
    if (name == "zipf") return zipf(parse_param(kvs, "alpha"));
    if (name == "alpha1logsq") return alpha1logsq(parse_param(kvs, "c"));
    throw std::invalid_argument("unknown family: " + name);
}

std::string WeightModel::spec_string() const {
    std::ostringstream os;
    os.precision(12);
    switch (family_) {
    case Family::PiPolyLog: os << "pipolylog:beta=" << params_.beta; break;
    case Family::PiStretchedExp:
        os << "pistretch:sigma=" << params_.sigma << ",lambda=" << params_.lambda;
        break;
    case Family::Zipf: os << "zipf:alpha=" << params_.alpha; break;
    case Family::AlphaOneLogSq: os << "alpha1logsq:c=" << params_.c; break;
    case Family::Finite: os << "finite:n=" << finite_probs_.size(); break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// rho: exact count via a family-specific closed-form guess followed by a
// local correction scan with the exact predicate 1/p_k <= t, evaluated as
// -log p_k <= log t to avoid overflow.

std::int64_t WeightModel::rho(double t) const {
    if (!(t > 0.0)) throw std::domain_error("rho: t must be > 0");
    const double logt = std::log(t);
    auto ok = [&](std::int64_t k) { return -log_prob(k) <= logt; };
    if (family_ == Family::Finite) {
        std::int64_t n = 0;
        for (std::int64_t k = 1; k <= finite_size(); ++k)
            if (ok(k)) ++n;
        return n;
    }
    if (!ok(1)) return 0;
    double lratio = logt - std::log(norm_); // log(t/W)
    double guess = 1.0;
    switch (family_) {
    case Family::PiPolyLog: guess = std::pow(lratio, params_.beta + 1.0); break;
    case Family::Zipf: guess = std::pow(t / norm_, params_.alpha); break;
    case Family::AlphaOneLogSq: {
        // k·log²(k+2) = t/W; fixed-point iteration on k.
        double x = std::exp(lratio);
        for (int i = 0; i < 60; ++i) {
            double ll = std::log(x + 2.0);
            x = std::exp(lratio) / (ll * ll);
        }
        guess = x;
        break;
    }
    case Family::PiStretchedExp: {
        // rho(t) = #{k: v_k <= lratio}; binary search over the v cache.
        std::int64_t lo = 1, hi = 2;
        while (ok(hi)) {
            lo = hi;
            hi *= 2;
            if (hi > (std::int64_t(1) << 40)) break;
        }
        while (lo + 1 < hi) {
            std::int64_t mid = lo + (hi - lo) / 2;
            if (ok(mid)) lo = mid;
            else hi = mid;
        }
        return lo;
    }
    case Family::Finite: break;
    }
    std::int64_t k = std::max<std::int64_t>(1, std::int64_t(guess));
    while (ok(k + 1)) ++k;
    while (k >= 1 && !ok(k)) --k;
    return k;
}

// ---------------------------------------------------------------------------

double WeightModel::tail_mass(std::int64_t k0) const {
    if (k0 < 1) throw std::domain_error("tail_mass: k0 must be >= 1");
    switch (family_) {
    case Family::Finite: {
        if (k0 >= finite_size()) return 0.0;
        double s = 0.0;
        for (std::int64_t k = k0 + 1; k <= finite_size(); ++k) s += prob(k);
        return s;
    }
    case Family::Zipf: {
        // Midpoint integral plus the Euler-Maclaurin allowance |f'(k0+1/2)|/24
        // is a valid upper bound on the tail sum and tight to ~f/(12·k0).
        double s = 1.0 / params_.alpha;
        double a = double(k0) + 0.5;
        return (tail_integral_zipf(s, a) + s * std::pow(a, -s - 1.0) / 24.0) / norm_;
    }
    case Family::PiPolyLog:
        return tail_integral_pipolylog(params_.beta, double(k0)) / norm_;
    case Family::AlphaOneLogSq: {
        double a = double(k0) + 0.5;
        double ll = std::log(a + 2.0);
        double fprime = (1.0 + 2.0 / ll) / (a * a * ll * ll);
        return (tail_integral_alpha1(a) + fprime / 24.0) / norm_;
    }
    case Family::PiStretchedExp: {
        double vk = stretch_v(double(k0));
        double slope = params_.sigma * params_.lambda * std::pow(vk, params_.lambda - 1.0);
        if (slope < 0.9) {
            double b = std::exp(-vk + params_.sigma * std::pow(vk, params_.lambda)) /
                       (1.0 - slope);
            return b / norm_;
        }
        // Very small k0: the trivial bound suffices.
        return 1.0;
    }
    }
    return 1.0;
}

void WeightModel::ensure_cache(std::int64_t k) const {
    auto& pre = cache_->prefix;
    while (std::int64_t(pre.size()) < k) {
        std::int64_t i = std::int64_t(pre.size()) + 1;
        double p = prob(i);
        pre.push_back(pre.empty() ? p : pre.back() + p);
    }
}

double WeightModel::prefix_mass(std::int64_t k) const {
    if (k < 0) throw std::domain_error("prefix_mass: k must be >= 0");
    if (k == 0) return 0.0;
    if (family_ == Family::Finite && k >= finite_size()) k = finite_size();
    std::lock_guard<std::recursive_mutex> lock(cache_->mu);
    ensure_cache(k);
    return cache_->prefix[std::size_t(k - 1)];
}

} // namespace occ
