// Scripted experiments connecting exact moments and simulation: asymptotic
// ratio tracking, CLT checks, de-Poissonization, variance-window
// concentration, and LIL path statistics.  Every verdict a report carries is
// recomputable from the numeric tables it emits.
#pragma once

#include "occ/exact_moments.hpp"
#include "occ/simulator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace occ {

// Evaluation grids.  "geometric:t0:t1:count" is the CLI syntax; the tau
// variant realizes the variance-level sequences w_n(gamma, mu) =
// n^{(1+gamma)/(mu-1)} (mu > 1) and w_n(gamma, 1) = exp(n^{(1+gamma)/(q+1)})
// used by the LIL proofs.
struct GridSpec {
    static GridSpec geometric(double t0, double t1, int count);
    static GridSpec tau(double gamma, double mu, double q, int count);
    static GridSpec parse(const std::string& spec);

    std::string spec_string;
    std::vector<double> values;
};

enum class Verdict { Pass, Fail, Inconclusive };

const char* verdict_name(Verdict v);

struct VerdictRow {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail; // the numbers the verdict was computed from
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string id;
    std::string config_echo; // JSON text of the resolved configuration
    std::uint64_t seed = 0;
    std::vector<Table> tables;
    std::vector<VerdictRow> verdicts;
    double runtime_seconds = 0.0;

    bool failed() const;
    const Table* table(const std::string& name) const;
    const VerdictRow* verdict(const std::string& name) const;
};

// Default tolerance set; every experiment echoes the values it used into its
// config so reports stay self-contained.
struct Tolerances {
    double ratio_final = 0.05;     // |ratio - 1| at the last grid point
    double clt_p_min = 0.01;       // KS p-value threshold
    double clt_var_min = 100.0;    // below this the CLT check is inconclusive
    double depois_var_lo = 0.9;    // Var ratio band at the largest n
    double depois_var_hi = 1.1;
    double window_fraction = 0.9;  // variance share of the Karlin window
    double lil_slack = 0.5;        // envelope bound = (1+slack)·constant
    double lil_symmetry = 0.2;     // |mean max + mean min| <= this·constant
    double lil_cover = 0.95;       // fraction of replicates inside the bound
};

// Exact mean/variance along the grid against constant·scale; pass when the
// final ratios sit within tol.ratio_final of 1 and the deviation |ratio - 1|
// is monotone decreasing over the last three feasible points.
ExperimentReport ratio_convergence(const WeightModel& model, unsigned j,
                                   const GridSpec& grid,
                                   CountKind kind = CountKind::ExactlyJ,
                                   Tolerances tol = {});

// Simulated K_j*(t) standardized by exact moments vs the standard normal:
// Kolmogorov-Smirnov p-value plus sample skewness/kurtosis.
ExperimentReport clt_check(const WeightModel& model, unsigned j, double t,
                           std::uint64_t replicates, std::uint64_t seed,
                           Tolerances tol = {});

// Exact fixed-n vs Poissonized moments over a ball-count grid: mean gap must
// shrink, the variance ratio at the largest n must sit in the band.
ExperimentReport depoissonization_check(const WeightModel& model, unsigned j,
                                        const std::vector<double>& n_grid,
                                        std::int64_t k_cap = 20000,
                                        Tolerances tol = {});

// Share of Var K_j*(t) carried by boxes with 1/p_k in (t/log t, t·log t].
ExperimentReport variance_window(const WeightModel& model, unsigned j,
                                 const GridSpec& grid, Tolerances tol = {});

// Coupled-path LIL statistics: R(t) = (count - exact mean)/sqrt(Var·m(Var))
// with m from lil_spec, for both the fixed-n and the Poissonized side of the
// coupling.  Property-based verdicts only (boundedness and sign symmetry);
// the a.s. constants themselves are not desk-verifiable.
ExperimentReport lil_paths(const WeightModel& model, unsigned j, const GridSpec& grid,
                           std::uint64_t replicates, std::uint64_t seed,
                           Tolerances tol = {});

} // namespace occ
