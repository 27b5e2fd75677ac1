// Reproducible Monte Carlo engines for the occupancy scheme.
//
// State per replicate: a dense array of 32-bit saturating counters for boxes
// k <= k_active plus a hash map for the sparse tail.  For the Zipf and
// AlphaOneLogSq families, balls beyond the dense horizon are placed EXACTLY
// by rejection sampling from a closed-form-invertible majorant, so there is
// no truncation bias (the overflow_count column reports how many balls went
// through that path).  The Pi families decay super-exponentially; their
// horizon is chosen so the expected number of balls beyond it over the whole
// grid is < 1e-6, and any such ball is counted as overflow, never silently
// dropped.
//
// Determinism: every random draw comes from a counter-based stream keyed by
// (seed, replicate, step, purpose), and each replicate's internal loops are
// serial, so results are bit-identical under any thread schedule.
#pragma once

#include "occ/rng.hpp"
#include "occ/weights.hpp"

#include <cstdint>
#include <vector>

namespace occ {

enum class GridDomain { Time, Balls };

struct SimConfig {
    explicit SimConfig(WeightModel m) : model(std::move(m)) {}
    WeightModel model;
    std::vector<double> grid; // strictly increasing times t_i or ball counts n_i
    GridDomain domain = GridDomain::Time;
    unsigned j_max = 5;
    std::uint64_t replicates = 1;
    std::uint64_t seed = 0;
    std::int64_t k_active = 0; // 0 = choose automatically
    bool parallel = true;
};

struct CensusPoint {
    double grid_value = 0.0;
    std::uint64_t balls = 0;     // balls thrown so far in this scheme
    std::uint64_t overflow = 0;  // cumulative balls beyond the dense horizon
    std::uint64_t saturated = 0; // boxes that hit the 32-bit counter ceiling
    std::vector<std::uint64_t> k_least; // K_j (>= j balls), j = 1..j_max
    std::vector<std::uint64_t> k_exact; // K_j* (exactly j), j = 1..j_max
};

struct ReplicatePath {
    std::uint64_t replicate = 0;
    std::vector<CensusPoint> points;
};

struct CoupledPath {
    ReplicatePath fixed_n;     // 𝒦 statistics at the ball-count grid
    ReplicatePath poissonized; // K statistics at the Poisson arrival counts
};

// Horizon selection: cost-balanced for the polynomial-tail families (which
// have an exact tail sampler), leak-certified (< 1e-6 expected stray balls)
// for the Pi families.  Throws if no admissible horizon exists.
std::int64_t choose_k_active(const WeightModel& model, double grid_max,
                             std::size_t steps);

// Expected number of balls beyond the horizon over the whole run; exactly 0
// for families with an exact tail sampler.
double tail_leak_bound(const WeightModel& model, double grid_max, std::int64_t k_active);

// Per-box independent Poisson increments on a time grid.
std::vector<ReplicatePath> simulate_poisson(const SimConfig& cfg);

// Sequential binomial thinning (exactly multinomial) on a ball-count grid.
std::vector<ReplicatePath> simulate_binomial(const SimConfig& cfg);

// The de-Poissonization coupling: one shared allocation stream read at the
// deterministic ball counts n_i and at the Poisson arrival counts π(n_i).
std::vector<CoupledPath> simulate_coupled(const SimConfig& cfg);

} // namespace occ
