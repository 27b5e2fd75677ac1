// Counter-based reproducible RNG and discrete samplers.
//
// Each random draw is a pure function of a 64-bit key mixed through the
// splitmix64 finalizer, so any (seed, replicate, grid step, purpose, counter)
// tuple yields the same value on every run and under any thread schedule.
#pragma once

#include <cmath>
#include <cstdint>

namespace occ {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// A keyed stream: state is derived once from the key tuple, then advances
// like splitmix64.  Creating a stream is cheap; create one per (replicate,
// step, purpose) rather than sharing across tasks.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t step,
              std::uint64_t purpose)
        : state_(mix64(mix64(mix64(mix64(seed) ^ replicate) ^ step) ^ purpose)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0,1): 53 random bits, never exactly 0 or 1.
    double next_double() {
        return (double(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double next_normal() {
        // Box–Muller without caching the second variate (keeps the stream
        // state a pure function of the draw count).
        double u1 = next_double(), u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

// Poisson sampler: inversion by sequential search for small means, Hörmann's
// transformed rejection (PTRS) for large means.  Both consume a variable
// number of uniforms from the stream.
std::uint64_t poisson_draw(RngStream& rng, double mean);

// Binomial(n, p): inversion (BINV) for small n·min(p,1-p), Hörmann's BTRS
// otherwise; p > 1/2 handled by reflection.
std::uint64_t binomial_draw(RngStream& rng, std::uint64_t n, double p);

} // namespace occ
