#include "occ/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace occ {

namespace {

constexpr std::uint64_t kPurposeDense = 1;
constexpr std::uint64_t kPurposeTailCount = 2;
constexpr std::uint64_t kPurposeTailPlace = 3;
constexpr std::uint64_t kPurposeArrivals = 4;

bool has_exact_tail_sampler(const WeightModel& m) {
    return m.family() == Family::Zipf || m.family() == Family::AlphaOneLogSq;
}

// Occupancy state: dense counters + sparse tail, with an incrementally
// maintained histogram so the census at a grid point is O(j_max).
class OccState {
public:
    OccState(std::int64_t k_active, unsigned j_max)
        : jcap_(j_max + 1), dense_(std::size_t(k_active), 0),
          bins_(std::size_t(jcap_) + 2, 0) {}

    void add(std::int64_t k, std::uint32_t delta) {
        if (delta == 0) return;
        std::uint32_t* slot;
        if (k <= std::int64_t(dense_.size())) {
            slot = &dense_[std::size_t(k - 1)];
        } else {
            slot = &tail_[k];
        }
        std::uint64_t c_old = *slot;
        std::uint64_t c_new = c_old + delta;
        if (c_new > std::numeric_limits<std::uint32_t>::max()) {
            c_new = std::numeric_limits<std::uint32_t>::max();
            if (c_old < c_new) ++saturated_;
        }
        *slot = std::uint32_t(c_new);
        if (c_old >= 1) --bins_[bin(c_old)];
        if (c_new >= 1) ++bins_[bin(c_new)];
    }

    // A ball whose box index exceeds the int64 range: its box has occupancy
    // probability < 1e-18 over any desk-scale run, so it is a singleton with
    // certainty; recorded straight into the count-1 histogram bin.
    void add_far_singleton() { ++bins_[1]; }

    std::uint64_t saturated() const { return saturated_; }

    // K_j and K_j* for j = 1..j_max.
    void census(std::vector<std::uint64_t>& k_least,
                std::vector<std::uint64_t>& k_exact) const {
        unsigned j_max = jcap_ - 1;
        k_least.assign(j_max, 0);
        k_exact.assign(j_max, 0);
        // suffix[j] = #boxes with count >= j, j = 1..jcap_+1
        std::uint64_t suffix = 0;
        std::vector<std::uint64_t> at_least(std::size_t(jcap_) + 2, 0);
        for (std::size_t j = bins_.size() - 1; j >= 1; --j) {
            suffix += bins_[j];
            at_least[j] = suffix;
        }
        for (unsigned j = 1; j <= j_max; ++j) {
            k_least[j - 1] = at_least[j];
            k_exact[j - 1] = at_least[j] - at_least[j + 1];
        }
    }

private:
    std::size_t bin(std::uint64_t c) const {
        return std::size_t(std::min<std::uint64_t>(c, jcap_ + 1));
    }
    unsigned jcap_;
    std::vector<std::uint32_t> dense_;
    std::unordered_map<std::int64_t, std::uint32_t> tail_;
    std::vector<std::uint64_t> bins_;
    std::uint64_t saturated_ = 0;
};

// Exact tail sampler: draws a box index k > h with P(k) ∝ p_k, by rejection
// from a continuous majorant with closed-form inverse CDF.  Returns 0 when
// the proposal lands beyond the int64-representable range: out there the
// acceptance ratio is 1 up to O(1e-18) and the box is a guaranteed singleton,
// so the caller records the ball without materializing an index.  Resampling
// those proposals instead would fold far-tail mass back onto low boxes and
// visibly bias the singleton count (measured ~1.5% for the alpha = 1 family
// at small horizons).
struct TailSampler {
    const WeightModel* model;
    std::int64_t h;
    double s; // Zipf exponent

    std::int64_t draw(RngStream& rng) const {
        const double hd = double(h);
        if (model->family() == Family::Zipf) {
            // Majorant x^{-s} on [h, ∞): k^{-s} <= ∫_{k-1}^k x^{-s} dx for k > h.
            for (int it = 0; it < 10000; ++it) {
                double u = rng.next_double();
                double x = hd * std::pow(1.0 - u, -1.0 / (s - 1.0));
                if (!(x < 9e18)) return 0;
                auto k = std::int64_t(std::floor(x)) + 1;
                double log_accept = -s * std::log(double(k)) -
                                    std::log((std::pow(double(k - 1), 1.0 - s) -
                                              std::pow(double(k), 1.0 - s)) /
                                             (s - 1.0));
                if (std::log(rng.next_double()) <= log_accept) return k;
            }
        } else {
            // AlphaOneLogSq: majorant 1/(x log² x) on [h, ∞), inverse CDF
            // x = exp(log h / (1-u)); w_k = 1/(k log²(k+2)) <= ∫_{k-1}^k.
            const double lh = std::log(hd);
            for (int it = 0; it < 10000; ++it) {
                double u = rng.next_double();
                double lx = lh / (1.0 - u);
                if (lx > 43.0) return 0; // box index beyond ~5e18
                auto k = std::int64_t(std::floor(std::exp(lx))) + 1;
                double lk = std::log(double(k + 2));
                double wk = 1.0 / (double(k) * lk * lk);
                double cell = 1.0 / std::log(double(k - 1)) - 1.0 / std::log(double(k));
                if (rng.next_double() * cell <= wk) return k;
            }
        }
        throw std::runtime_error("tail sampler failed to accept (should be unreachable)");
    }
};

struct Engine {
    const WeightModel& model;
    std::int64_t h;
    unsigned j_max;
    std::uint64_t seed;
    bool exact_tail;
    double dense_mass;                 // P_h
    const std::vector<double>& pdense; // p_1..p_h
    TailSampler tail;

    void place_tail_balls(OccState& st, RngStream& rng, std::uint64_t n,
                          std::uint64_t& overflow) const {
        overflow += n;
        if (!exact_tail) return; // Pi families: leak-certified, counted only
        for (std::uint64_t b = 0; b < n; ++b) {
            std::int64_t k = tail.draw(rng);
            if (k == 0)
                st.add_far_singleton();
            else
                st.add(k, 1);
        }
    }

    // Poisson increments over (t0, t1].
    void step_poisson(OccState& st, std::uint64_t rep, std::uint64_t step_id, double dt,
                      std::uint64_t& balls, std::uint64_t& overflow) const {
        RngStream rng(seed, rep, step_id, kPurposeDense);
        for (std::int64_t k = 1; k <= h; ++k) {
            std::uint64_t c = poisson_draw(rng, pdense[std::size_t(k - 1)] * dt);
            if (c) {
                st.add(k, std::uint32_t(std::min<std::uint64_t>(c, 0xffffffffULL)));
                balls += c;
            }
        }
        RngStream rng_tail(seed, rep, step_id, kPurposeTailCount);
        std::uint64_t n_tail = poisson_draw(rng_tail, (1.0 - dense_mass) * dt);
        balls += n_tail;
        RngStream rng_place(seed, rep, step_id, kPurposeTailPlace);
        place_tail_balls(st, rng_place, n_tail, overflow);
    }

    // Multinomial allocation of dn balls by sequential binomial thinning.
    void step_binomial(OccState& st, std::uint64_t rep, std::uint64_t step_id,
                       std::uint64_t dn, std::uint64_t& balls,
                       std::uint64_t& overflow) const {
        RngStream rng(seed, rep, step_id, kPurposeDense);
        std::uint64_t n_rem = dn;
        double mass_rem = 1.0;
        for (std::int64_t k = 1; k <= h && n_rem > 0; ++k) {
            double p = pdense[std::size_t(k - 1)] / mass_rem;
            if (p > 1.0) p = 1.0;
            std::uint64_t c = binomial_draw(rng, n_rem, p);
            if (c) st.add(k, std::uint32_t(std::min<std::uint64_t>(c, 0xffffffffULL)));
            n_rem -= c;
            mass_rem -= pdense[std::size_t(k - 1)];
            if (mass_rem <= 0.0) mass_rem = std::numeric_limits<double>::min();
        }
        balls += dn;
        RngStream rng_place(seed, rep, step_id, kPurposeTailPlace);
        place_tail_balls(st, rng_place, n_rem, overflow);
    }
};

Engine make_engine(const SimConfig& cfg, std::int64_t h, const std::vector<double>& pdense,
                   double dense_mass) {
    Engine e{cfg.model,
             h,
             cfg.j_max,
             cfg.seed,
             has_exact_tail_sampler(cfg.model),
             dense_mass,
             pdense,
             TailSampler{&cfg.model, h,
                         cfg.model.family() == Family::Zipf
                             ? 1.0 / cfg.model.params().alpha
                             : 0.0}};
    return e;
}

void validate_grid(const SimConfig& cfg) {
    if (cfg.grid.empty()) throw std::invalid_argument("simulate: empty grid");
    for (std::size_t i = 0; i + 1 < cfg.grid.size(); ++i)
        if (!(cfg.grid[i] < cfg.grid[i + 1]))
            throw std::invalid_argument("simulate: grid must be strictly increasing");
    if (cfg.replicates < 1) throw std::invalid_argument("simulate: replicates >= 1");
}

std::int64_t resolve_k_active(const SimConfig& cfg) {
    double grid_max = cfg.grid.back();
    std::int64_t h = cfg.k_active > 0
                         ? cfg.k_active
                         : choose_k_active(cfg.model, grid_max, cfg.grid.size());
    if (!has_exact_tail_sampler(cfg.model) && !cfg.model.is_finite()) {
        if (tail_leak_bound(cfg.model, grid_max, h) >= 1e-6)
            throw std::invalid_argument(
                "simulate: k_active too small for the 1e-6 tail-leak certificate");
    }
    return h;
}

} // namespace

std::int64_t choose_k_active(const WeightModel& model, double grid_max, std::size_t steps) {
    if (model.is_finite()) return model.finite_size();
    if (has_exact_tail_sampler(model)) {
        // Balance dense per-step iteration against per-ball tail sampling.
        std::int64_t best = 1024;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::int64_t h = 1024; h <= (std::int64_t(1) << 23); h *= 2) {
            double cost = double(steps) * double(h) +
                          3.0 * grid_max * model.tail_mass(h);
            if (cost < best_cost) {
                best_cost = cost;
                best = h;
            }
        }
        return best;
    }
    for (std::int64_t h = 1024; h <= (std::int64_t(1) << 24); h *= 2)
        if (grid_max * model.tail_mass(h) < 1e-7) return h;
    throw std::invalid_argument("choose_k_active: no horizon satisfies the leak bound");
}

double tail_leak_bound(const WeightModel& model, double grid_max, std::int64_t k_active) {
    if (model.is_finite() || has_exact_tail_sampler(model)) return 0.0;
    return grid_max * model.tail_mass(k_active);
}

namespace {

template <typename StepFn>
auto run_replicates(const SimConfig& cfg, StepFn&& make_path) {
    using Path = decltype(make_path(std::uint64_t(0)));
    std::vector<Path> out(cfg.replicates);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel && cfg.replicates > 1)
#endif
    for (std::int64_t rep = 0; rep < std::int64_t(cfg.replicates); ++rep)
        out[std::size_t(rep)] = make_path(std::uint64_t(rep));
    return out;
}

} // namespace

std::vector<ReplicatePath> simulate_poisson(const SimConfig& cfg) {
    validate_grid(cfg);
    std::int64_t h = resolve_k_active(cfg);
    std::vector<double> pdense(std::size_t(h), 0.0);
    for (std::int64_t k = 1; k <= h; ++k) pdense[std::size_t(k - 1)] = cfg.model.prob(k);
    double dense_mass = cfg.model.is_finite() ? 1.0 : cfg.model.prefix_mass(h);
    Engine eng = make_engine(cfg, h, pdense, dense_mass);

    return run_replicates(cfg, [&](std::uint64_t rep) {
        ReplicatePath path;
        path.replicate = rep;
        OccState st(h, cfg.j_max);
        double t_prev = 0.0;
        std::uint64_t balls = 0, overflow = 0;
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            eng.step_poisson(st, rep, std::uint64_t(i), cfg.grid[i] - t_prev, balls,
                             overflow);
            t_prev = cfg.grid[i];
            CensusPoint cp;
            cp.grid_value = cfg.grid[i];
            cp.balls = balls;
            cp.overflow = overflow;
            cp.saturated = st.saturated();
            st.census(cp.k_least, cp.k_exact);
            path.points.push_back(std::move(cp));
        }
        return path;
    });
}

std::vector<ReplicatePath> simulate_binomial(const SimConfig& cfg) {
    validate_grid(cfg);
    std::int64_t h = resolve_k_active(cfg);
    std::vector<double> pdense(std::size_t(h), 0.0);
    for (std::int64_t k = 1; k <= h; ++k) pdense[std::size_t(k - 1)] = cfg.model.prob(k);
    double dense_mass = cfg.model.is_finite() ? 1.0 : cfg.model.prefix_mass(h);
    Engine eng = make_engine(cfg, h, pdense, dense_mass);

    return run_replicates(cfg, [&](std::uint64_t rep) {
        ReplicatePath path;
        path.replicate = rep;
        OccState st(h, cfg.j_max);
        std::uint64_t n_prev = 0, balls = 0, overflow = 0;
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            auto n_i = std::uint64_t(cfg.grid[i]);
            eng.step_binomial(st, rep, std::uint64_t(i), n_i - n_prev, balls, overflow);
            n_prev = n_i;
            CensusPoint cp;
            cp.grid_value = cfg.grid[i];
            cp.balls = balls;
            cp.overflow = overflow;
            cp.saturated = st.saturated();
            st.census(cp.k_least, cp.k_exact);
            path.points.push_back(std::move(cp));
        }
        return path;
    });
}

std::vector<CoupledPath> simulate_coupled(const SimConfig& cfg) {
    validate_grid(cfg);
    if (cfg.domain != GridDomain::Balls)
        throw std::invalid_argument("simulate_coupled: grid must be in the ball domain");
    std::int64_t h = resolve_k_active(cfg);
    std::vector<double> pdense(std::size_t(h), 0.0);
    for (std::int64_t k = 1; k <= h; ++k) pdense[std::size_t(k - 1)] = cfg.model.prob(k);
    double dense_mass = cfg.model.is_finite() ? 1.0 : cfg.model.prefix_mass(h);
    Engine eng = make_engine(cfg, h, pdense, dense_mass);

    return run_replicates(cfg, [&](std::uint64_t rep) {
        CoupledPath cp;
        cp.fixed_n.replicate = rep;
        cp.poissonized.replicate = rep;

        // Poisson arrival counts N_i = π(n_i), one shared unit-rate process.
        const std::size_t G = cfg.grid.size();
        std::vector<std::uint64_t> narr(G);
        {
            RngStream rng(cfg.seed, rep, 0, kPurposeArrivals);
            std::uint64_t acc = 0;
            double prev = 0.0;
            for (std::size_t i = 0; i < G; ++i) {
                acc += poisson_draw(rng, cfg.grid[i] - prev);
                prev = cfg.grid[i];
                narr[i] = acc;
            }
        }

        // Merge the deterministic thresholds n_i and the arrival counts N_i
        // into one ordered event list over the shared ball stream.
        struct Event {
            std::uint64_t threshold;
            std::size_t grid_idx;
            bool poisson_side;
        };
        std::vector<Event> ev;
        ev.reserve(2 * G);
        for (std::size_t i = 0; i < G; ++i) {
            ev.push_back({std::uint64_t(cfg.grid[i]), i, false});
            ev.push_back({narr[i], i, true});
        }
        std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
            return a.threshold < b.threshold;
        });

        OccState st(h, cfg.j_max);
        std::uint64_t n_done = 0, balls = 0, overflow = 0;
        std::uint64_t step_id = 1; // 0 is the arrival stream
        for (const Event& e : ev) {
            if (e.threshold > n_done) {
                eng.step_binomial(st, rep, step_id++, e.threshold - n_done, balls,
                                  overflow);
                n_done = e.threshold;
            }
            CensusPoint pt;
            pt.grid_value = cfg.grid[e.grid_idx];
            pt.balls = n_done;
            pt.overflow = overflow;
            pt.saturated = st.saturated();
            st.census(pt.k_least, pt.k_exact);
            auto& side = e.poisson_side ? cp.poissonized : cp.fixed_n;
            side.points.push_back(std::move(pt));
        }
        // Events were emitted in threshold order; restore grid order per side.
        auto fix = [](ReplicatePath& p) {
            std::stable_sort(p.points.begin(), p.points.end(),
                             [](const CensusPoint& a, const CensusPoint& b) {
                                 return a.grid_value < b.grid_value;
                             });
        };
        fix(cp.fixed_n);
        fix(cp.poissonized);
        return cp;
    });
}

} // namespace occ
