// Deterministic parallel reductions.
//
// Results must be byte-identical regardless of thread count, so we never use
// an OpenMP `reduction` clause directly on floating point.  Instead each
// fixed-size chunk of the index range is summed independently (parallel), and
// the chunk partials are combined serially in index order.  The serial
// reference path runs the identical chunked arithmetic, so serial and parallel
// results are bit-identical by construction.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace occ {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

constexpr std::size_t kChunk = 4096;

// Sum f(i) for i in [begin, end).  `parallel=false` gives the serial
// reference; both orderings of the final combine are identical.
template <typename F>
double chunked_sum(std::int64_t begin, std::int64_t end, F&& f, bool parallel = true) {
    if (end <= begin) return 0.0;
    const std::int64_t n = end - begin;
    const std::int64_t nchunks = (n + std::int64_t(kChunk) - 1) / std::int64_t(kChunk);
    std::vector<double> partial(std::size_t(nchunks), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && nchunks > 1)
#endif
    for (std::int64_t c = 0; c < nchunks; ++c) {
        const std::int64_t lo = begin + c * std::int64_t(kChunk);
        const std::int64_t hi = std::min(end, lo + std::int64_t(kChunk));
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += f(i);
        partial[std::size_t(c)] = s;
    }
    (void)parallel;
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

// Two accumulators in one sweep (e.g. value and error estimate).
template <typename F>
void chunked_sum2(std::int64_t begin, std::int64_t end, F&& f, double& out_a, double& out_b,
                  bool parallel = true) {
    out_a = out_b = 0.0;
    if (end <= begin) return;
    const std::int64_t n = end - begin;
    const std::int64_t nchunks = (n + std::int64_t(kChunk) - 1) / std::int64_t(kChunk);
    std::vector<double> pa(std::size_t(nchunks), 0.0), pb(std::size_t(nchunks), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && nchunks > 1)
#endif
    for (std::int64_t c = 0; c < nchunks; ++c) {
        const std::int64_t lo = begin + c * std::int64_t(kChunk);
        const std::int64_t hi = std::min(end, lo + std::int64_t(kChunk));
        double sa = 0.0, sb = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            auto [a, b] = f(i);
            sa += a;
            sb += b;
        }
        pa[std::size_t(c)] = sa;
        pb[std::size_t(c)] = sb;
    }
    (void)parallel;
    for (std::size_t c = 0; c < std::size_t(nchunks); ++c) {
        out_a += pa[c];
        out_b += pb[c];
    }
}

} // namespace occ
