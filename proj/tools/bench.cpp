// Benchmark: serial vs OpenMP chunked reduction on a representative
// exact-moment workload, plus a full mean/variance evaluation both ways.
// The two paths must agree bit-for-bit (the parallel reduction combines
// fixed-size chunks in index order).
#include "occ/exact_moments.hpp"
#include "occ/parallel.hpp"
#include "occ/weights.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

int main() {
    auto model = occ::WeightModel::parse("zipf:alpha=0.5");
    const double t = 1e9;

    std::printf("threads available: %d\n", occ::max_threads());

    // Raw reduction over 2e7 terms.
    const std::int64_t N = 20'000'000;
    auto term = [&](std::int64_t k) {
        double x = double(k);
        return std::exp(-1.0 / x) / (x + 1.0);
    };
    double t0 = now();
    double serial = occ::chunked_sum(1, N + 1, term, false);
    double t1 = now();
    double parallel = occ::chunked_sum(1, N + 1, term, true);
    double t2 = now();
    std::printf("chunked_sum %lld terms: serial %.3fs, parallel %.3fs, speedup %.2fx\n",
                (long long)N, t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1));
    std::printf("bit-identical: %s\n", serial == parallel ? "yes" : "NO");

    // Full moment evaluation.
    t0 = now();
    auto ms = occ::var_poisson_exact(model, 1, t, occ::CountKind::ExactlyJ,
                                     occ::kDefaultMomentTol, false);
    t1 = now();
    auto mp = occ::var_poisson_exact(model, 1, t, occ::CountKind::ExactlyJ,
                                     occ::kDefaultMomentTol, true);
    t2 = now();
    std::printf("var_poisson_exact t=1e9: serial %.3fs, parallel %.3fs, speedup %.2fx\n",
                t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1));
    std::printf("bit-identical: %s (value %.17g)\n",
                ms.value == mp.value ? "yes" : "NO", mp.value);
    return 0;
}
