#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "occ/mathfn.hpp"
#include "occ/rng.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace occ;

TEST_CASE("incomplete gamma halves sum to one") {
    for (double a : {0.5, 1.0, 3.0, 17.5, 120.0}) {
        for (double x : {0.1, 1.0, 5.0, 50.0, 300.0}) {
            CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("poisson tail against the direct series") {
    for (unsigned j : {1u, 2u, 5u}) {
        for (double m : {0.1, 1.0, 4.0, 20.0}) {
            double direct = 1.0;
            for (unsigned i = 0; i < j; ++i) direct -= std::exp(log_poisson_pmf(i, m));
            CHECK(poisson_ccdf_geq(j, m) == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("adaptive quadrature covers the full interval") {
    // regression: an earlier version silently integrated only [a, (a+b)/2]
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 2.0) ==
          doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, 3.14159265358979324) ==
          doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("normal cdf reference points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
    CHECK(normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-9));
}

TEST_CASE("ks p-value behaves like a p-value") {
    double prev = 1.0;
    for (double d : {0.005, 0.01, 0.02, 0.04, 0.08}) {
        double p = ks_pvalue(d, 5000);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p <= prev + 1e-12);
        prev = p;
    }
    CHECK(ks_pvalue(0.001, 1000) > 0.99);
    CHECK(ks_pvalue(0.2, 1000) < 1e-6);
}

TEST_CASE("rng streams are deterministic and decorrelated by purpose") {
    RngStream a(123, 4, 5, 6), b(123, 4, 5, 6), c(123, 4, 5, 7);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    RngStream u(9, 0, 0, 0);
    for (int i = 0; i < 1000; ++i) {
        double v = u.next_double();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

namespace {

void check_mean_var(const char* what, double mean, double var, double m_ref,
                    double v_ref, std::size_t n) {
    double se_mean = std::sqrt(v_ref / double(n));
    // SE of the sample variance of an (approximately) Poisson/binomial sample;
    // 4th-central-moment bound 3v² + v is generous for both.
    double se_var = std::sqrt((3.0 * v_ref * v_ref + v_ref) / double(n));
    INFO(what, ": mean ", mean, " vs ", m_ref, ", var ", var, " vs ", v_ref);
    CHECK(std::fabs(mean - m_ref) < 4.0 * se_mean);
    CHECK(std::fabs(var - v_ref) < 4.0 * se_var + 1e-9);
}

} // namespace

TEST_CASE("poisson sampler moments across the mean range") {
    const std::size_t M = 200000;
    int purpose = 0;
    for (double mu : {0.3, 2.0, 9.5, 10.5, 80.0, 4000.0}) {
        RngStream rng(2024, 0, 0, std::uint64_t(purpose++));
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < M; ++i) {
            double v = double(poisson_draw(rng, mu));
            s += v;
            s2 += v * v;
        }
        double mean = s / double(M);
        double var = s2 / double(M) - mean * mean;
        check_mean_var("poisson", mean, var, mu, mu, M);
    }
}

TEST_CASE("binomial sampler moments across both algorithm branches") {
    const std::size_t M = 200000;
    int purpose = 100;
    struct Case {
        std::uint64_t n;
        double p;
    };
    for (Case c : {Case{10, 0.3}, Case{1000, 0.002}, Case{1000, 0.4}, Case{50, 0.9},
                   Case{100000, 0.25}}) {
        RngStream rng(77, 0, 0, std::uint64_t(purpose++));
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < M; ++i) {
            double v = double(binomial_draw(rng, c.n, c.p));
            s += v;
            s2 += v * v;
        }
        double mean = s / double(M);
        double var = s2 / double(M) - mean * mean;
        check_mean_var("binomial", mean, var, double(c.n) * c.p,
                       double(c.n) * c.p * (1.0 - c.p), M);
    }
}

TEST_CASE("poisson sampler distribution: chi-square against the pmf") {
    const std::size_t M = 200000;
    const double mu = 3.0;
    RngStream rng(5150, 0, 0, 0);
    std::map<std::uint64_t, std::uint64_t> hist;
    for (std::size_t i = 0; i < M; ++i) ++hist[poisson_draw(rng, mu)];
    double chi2 = 0.0;
    int df = -1;
    double tail_expect = double(M);
    for (std::uint64_t k = 0; k <= 12; ++k) {
        double e = double(M) * std::exp(log_poisson_pmf(unsigned(k), mu));
        tail_expect -= e;
        double o = hist.count(k) ? double(hist[k]) : 0.0;
        chi2 += (o - e) * (o - e) / e;
        ++df;
    }
    // lump everything beyond 12 into one cell
    std::uint64_t o_tail = 0;
    for (const auto& [k, n] : hist)
        if (k > 12) o_tail += n;
    chi2 += (double(o_tail) - tail_expect) * (double(o_tail) - tail_expect) /
            tail_expect;
    ++df;
    CHECK(chi2_sf(chi2, double(df)) > 1e-3);
}

TEST_CASE("extreme binomial edge cases") {
    RngStream rng(1, 2, 3, 4);
    CHECK(binomial_draw(rng, 0, 0.5) == 0);
    CHECK(binomial_draw(rng, 100, 0.0) == 0);
    CHECK(binomial_draw(rng, 100, 1.0) == 100);
    CHECK(poisson_draw(rng, 0.0) == 0);
}
