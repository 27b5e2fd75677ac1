#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "occ/exact_moments.hpp"
#include "occ/mathfn.hpp"
#include "occ/rng.hpp"

#include <cmath>
#include <vector>

using namespace occ;

namespace {

// Exhaustive allocation law of the exactly-j count for a finite model.
struct Enumerated {
    double mean = 0.0, var = 0.0;
    std::vector<double> pmf; // law of the count, index = value
};

Enumerated enumerate_exact_count(const std::vector<double>& p, unsigned j,
                                 unsigned n) {
    Enumerated out;
    out.pmf.assign(p.size() + 1, 0.0);
    std::vector<unsigned> counts(p.size(), 0);
    // iterate over all compositions of n into |p| parts
    std::function<void(std::size_t, unsigned, double, double)> rec =
        [&](std::size_t box, unsigned left, double logprob, double logperm) {
            if (box + 1 == p.size()) {
                counts[box] = left;
                double lp = logprob + double(left) * std::log(p[box]) -
                            log_factorial(left) + logperm;
                unsigned kj = 0;
                for (unsigned c : counts) kj += (c == j);
                double pr = std::exp(lp);
                out.pmf[kj] += pr;
                out.mean += double(kj) * pr;
                out.var += double(kj) * double(kj) * pr;
                return;
            }
            for (unsigned c = 0; c <= left; ++c) {
                counts[box] = c;
                rec(box + 1, left - c,
                    logprob + double(c) * std::log(p[box]) - log_factorial(c),
                    logperm);
            }
        };
    rec(0, n, 0.0, log_factorial(n));
    out.var -= out.mean * out.mean;
    return out;
}

} // namespace

TEST_CASE("two-box Poissonized closed forms") {
    auto m = WeightModel::finite({0.5, 0.5});
    // each box is Poisson(1) at t = 2
    auto me = mean_poisson_exact(m, 1, 2.0);
    auto va = var_poisson_exact(m, 1, 2.0);
    double e1 = std::exp(-1.0);
    CHECK(me.value == doctest::Approx(2.0 * e1).epsilon(1e-12));          // 0.735759
    CHECK(va.value == doctest::Approx(2.0 * e1 * (1 - e1)).epsilon(1e-12)); // 0.465088
    // fixed n = 2: K_1* is 0 or 2 with equal probability -> variance 1
    auto vb = var_binomial_exact(m, 1, 2);
    CHECK(vb.value == doctest::Approx(1.0).epsilon(1e-12));
    auto mb = mean_binomial_exact(m, 1, 2);
    CHECK(mb.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("finite enumeration oracle: mean and variance to 1e-12") {
    std::vector<std::vector<double>> models = {
        {0.5, 0.3, 0.2}, {0.7, 0.2, 0.1}, {0.6, 0.4}};
    for (const auto& probs : models) {
        auto m = WeightModel::finite(std::vector<double>(probs));
        for (unsigned n : {2u, 4u, 6u}) {
            for (unsigned j = 1; j <= std::min(n, 3u); ++j) {
                auto ref = enumerate_exact_count(probs, j, n);
                auto me = mean_binomial_exact(m, j, n);
                auto va = var_binomial_exact(m, j, n);
                CAPTURE(n);
                CAPTURE(j);
                CHECK(std::fabs(me.value - ref.mean) < 1e-12);
                CHECK(std::fabs(va.value - ref.var) < 1e-12);
            }
        }
    }
}

TEST_CASE("variance identity on random family/j/t triples") {
    std::vector<WeightModel> models = {
        WeightModel::pipolylog(1.0), WeightModel::pistretch(1.0, 0.5),
        WeightModel::zipf(0.5), WeightModel::alpha1logsq(1.0)};
    RngStream rng(314, 0, 0, 0);
    for (int q = 0; q < 40; ++q) {
        const auto& m = models[std::size_t(q) % models.size()];
        unsigned j = 1 + unsigned(rng.next_u64() % 5);
        double t = std::exp(rng.next_double() * std::log(1e6));
        auto direct = var_poisson_exact(m, j, t);
        auto rhs = var_identity_rhs(m, j, t);
        CAPTURE(m.spec_string());
        CAPTURE(j);
        CAPTURE(t);
        CHECK(std::fabs(direct.value - rhs.value) <=
              direct.error_bound + rhs.error_bound + 1e-10 * std::fabs(direct.value));
    }
}

TEST_CASE("Poissonized variance never exceeds the mean for exactly-j counts") {
    // Var = Σ π(1-π) <= Σ π = E, box by box
    for (const auto& m : {WeightModel::zipf(0.5), WeightModel::pipolylog(2.0),
                          WeightModel::alpha1logsq(1.0)}) {
        for (double t : {10.0, 1e3, 1e5}) {
            for (unsigned j : {1u, 3u}) {
                auto me = mean_poisson_exact(m, j, t);
                auto va = var_poisson_exact(m, j, t);
                CHECK(va.value <= me.value * (1.0 + 1e-12));
                CHECK(va.value >= 0.0);
            }
        }
    }
}

TEST_CASE("at-least counts dominate exactly counts and match their difference") {
    auto m = WeightModel::zipf(0.5);
    double t = 1e4;
    for (unsigned j : {1u, 2u, 4u}) {
        auto atj = mean_poisson_exact(m, j, t, CountKind::AtLeastJ);
        auto atj1 = mean_poisson_exact(m, j + 1, t, CountKind::AtLeastJ);
        auto exj = mean_poisson_exact(m, j, t, CountKind::ExactlyJ);
        CHECK(atj.value > atj1.value);
        CHECK(atj.value - atj1.value ==
              doctest::Approx(exj.value).epsilon(1e-8));
    }
}

TEST_CASE("tolerance tightening stays within the reported error bound") {
    auto m = WeightModel::alpha1logsq(1.0); // the family with the heaviest tail
    double t = 1e5;
    auto loose = mean_poisson_exact(m, 1, t, CountKind::ExactlyJ, 1e-5);
    auto tight = mean_poisson_exact(m, 1, t, CountKind::ExactlyJ, 1e-11);
    CHECK(std::fabs(loose.value - tight.value) <=
          loose.error_bound + tight.error_bound);
    CHECK(tight.error_bound <= loose.error_bound);
}

TEST_CASE("binomial means approach Poissonized means as n grows") {
    auto m = WeightModel::zipf(0.5);
    double prev_gap = 1e300;
    for (double n : {100.0, 1000.0, 10000.0}) {
        auto mb = mean_binomial_exact(m, 1, std::uint64_t(n));
        auto mp = mean_poisson_exact(m, 1, n);
        double gap = std::fabs(mb.value - mp.value);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("variance window partitions the total variance") {
    auto m = WeightModel::zipf(0.5);
    double t = 1e5;
    auto total = var_poisson_exact(m, 1, t);
    // a window reaching far past the variance bulk recovers nearly all of it
    // (boxes beyond level 1e12 can contribute at most t·tail_mass(rho(1e12)))
    const double far = 1e12;
    double full = var_poisson_window(m, 1, t, 0.0, far);
    CHECK(full == doctest::Approx(total.value).epsilon(1e-3));
    CHECK(full <= total.value * (1.0 + 1e-12));
    double lo = t / std::log(t), hi = t * std::log(t);
    double part = var_poisson_window(m, 1, t, lo, hi);
    CHECK(part >= 0.0);
    CHECK(part <= full * (1.0 + 1e-12));
    // disjoint windows add up exactly
    double left = var_poisson_window(m, 1, t, 0.0, lo);
    double right = var_poisson_window(m, 1, t, hi, far);
    CHECK(left + part + right == doctest::Approx(full).epsilon(1e-9));
}
