// Command-line front end: exact moments, asymptotic constants, simulation,
// and the scripted experiments, with deterministic CSV/JSON/SVG outputs.
//
// Exit codes: 0 success/pass, 1 experiment verdict failed, 2 usage error,
// 3 numeric or truncation failure.
#include "occ/asymptotics.hpp"
#include "occ/exact_moments.hpp"
#include "occ/experiments.hpp"
#include "occ/report.hpp"
#include "occ/simulator.hpp"
#include "occ/weights.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitPass = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

fs::path default_out() {
    if (const char* env = std::getenv("OCCTOOL_OUT")) return env;
    return "occtool-out";
}

// "1..5" or "3" -> [lo, hi]
std::pair<unsigned, unsigned> parse_j_range(const std::string& s) {
    auto dots = s.find("..");
    unsigned lo, hi;
    if (dots == std::string::npos) {
        lo = hi = unsigned(std::stoul(s));
    } else {
        lo = unsigned(std::stoul(s.substr(0, dots)));
        hi = unsigned(std::stoul(s.substr(dots + 2)));
    }
    if (lo < 1 || hi < lo) throw CLI::ValidationError("--j", "need 1 <= lo <= hi");
    return {lo, hi};
}

int finish_report(const occ::ExperimentReport& rep, const fs::path& out) {
    occ::write_report(rep, out);
    occ::write_manifest(rep.config_echo, out);
    for (const auto& v : rep.verdicts)
        std::cerr << rep.id << ": " << v.name << " = " << occ::verdict_name(v.verdict)
                  << " (" << v.detail << ")\n";
    std::cerr << rep.id << ": runtime " << rep.runtime_seconds << " s, outputs in "
              << out.string() << "\n";
    return rep.failed() ? kExitVerdictFail : kExitPass;
}

struct CommonOpts {
    std::string family;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool wants_seed = true) {
    cmd->add_option("--family", c.family,
                    "family spec, e.g. zipf:alpha=0.5 or pipolylog:beta=2")
        ->required();
    cmd->add_option("--out", c.out, "output directory");
    if (wants_seed) cmd->add_option("--seed", c.seed, "RNG seed");
    cmd->add_option("--threads", c.threads,
                    "worker threads (results are independent of this)");
}

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int run_constants(const CommonOpts& c, const std::string& j_range) {
    auto model = occ::WeightModel::parse(c.family);
    auto [jlo, jhi] = parse_j_range(j_range);
    occ::Table t{"constants",
                 {"j", "mean_constant", "var_constant", "c_j_alpha", "lil_constant",
                  "mu", "q", "upper_bound_only"},
                 {}};
    for (unsigned j = jlo; j <= jhi; ++j) {
        auto reg = occ::lil_spec(model, j);
        double cja = std::numeric_limits<double>::quiet_NaN();
        if (reg.regime == occ::RegimeKind::RegVar ||
            reg.regime == occ::RegimeKind::RegVarOne)
            cja = occ::c_j_alpha(j, reg.regime == occ::RegimeKind::RegVar ? reg.alpha
                                                                          : 1.0);
        t.rows.push_back({double(j), occ::mean_constant(reg, j),
                          occ::var_constant(reg, j), cja, reg.lil_constant, reg.mu(),
                          reg.q, reg.upper_bound_only ? 1.0 : 0.0});
    }
    occ::ExperimentReport rep;
    rep.id = "constants";
    rep.config_echo = json{{"family", model.spec_string()}, {"j", j_range}}.dump();
    rep.tables.push_back(std::move(t));
    fs::path out = c.out.empty() ? default_out() : fs::path(c.out);
    occ::write_report(rep, out);
    occ::write_manifest(rep.config_echo, out);
    std::cerr << "constants: outputs in " << out.string() << "\n";
    return kExitPass;
}

int run_moments(const CommonOpts& c, unsigned j, double t, const std::string& kind_s,
                std::uint64_t n_balls) {
    auto model = occ::WeightModel::parse(c.family);
    json doc;
    doc["family"] = model.spec_string();
    doc["j"] = j;
    if (n_balls > 0) {
        auto me = occ::mean_binomial_exact(model, j, n_balls);
        auto va = occ::var_binomial_exact(model, j, n_balls);
        doc["n"] = n_balls;
        doc["mean"] = {{"value", me.value}, {"error_bound", me.error_bound}};
        doc["variance"] = {{"value", va.value},
                           {"error_bound", va.error_bound},
                           {"residual_estimate", va.residual_estimate}};
    } else {
        auto kind = kind_s == "atleast" ? occ::CountKind::AtLeastJ
                                        : occ::CountKind::ExactlyJ;
        auto me = occ::mean_poisson_exact(model, j, t, kind);
        auto va = occ::var_poisson_exact(model, j, t, kind);
        doc["t"] = t;
        doc["kind"] = kind_s;
        doc["mean"] = {{"value", me.value}, {"error_bound", me.error_bound}};
        doc["variance"] = {{"value", va.value}, {"error_bound", va.error_bound}};
    }
    fs::path out = c.out.empty() ? default_out() : fs::path(c.out);
    fs::create_directories(out);
    std::ofstream os(out / "moments.json", std::ios::binary);
    os << doc.dump(2) << "\n";
    occ::write_manifest(doc.dump(), out);
    std::cout << doc.dump(2) << "\n";
    return kExitPass;
}

int run_simulate(const CommonOpts& c, const std::string& grid_s,
                 const std::string& domain_s, unsigned j_max, std::uint64_t reps) {
    auto model = occ::WeightModel::parse(c.family);
    auto grid = occ::GridSpec::parse(grid_s);
    occ::SimConfig cfg(model);
    cfg.grid = grid.values;
    cfg.domain = domain_s == "balls" ? occ::GridDomain::Balls : occ::GridDomain::Time;
    cfg.j_max = j_max;
    cfg.replicates = reps;
    cfg.seed = c.seed;
    auto paths = cfg.domain == occ::GridDomain::Balls ? occ::simulate_binomial(cfg)
                                                      : occ::simulate_poisson(cfg);
    fs::path out = c.out.empty() ? default_out() : fs::path(c.out);
    fs::create_directories(out);
    occ::write_paths_csv(paths, j_max, out / "paths.csv");
    occ::write_manifest(json{{"family", model.spec_string()},
                             {"grid", grid.spec_string},
                             {"domain", domain_s},
                             {"j_max", j_max},
                             {"replicates", reps},
                             {"seed", c.seed}}
                            .dump(),
                        out);
    std::cerr << "simulate: wrote " << (out / "paths.csv").string() << "\n";
    return kExitPass;
}

int dispatch_experiment(const std::string& id, const json& cfg, const fs::path& out);

int run_replay(const std::string& report_file, const std::string& out_s) {
    std::ifstream is(report_file);
    if (!is) {
        std::cerr << "replay: cannot read " << report_file << "\n";
        return kExitUsage;
    }
    json doc = json::parse(is);
    fs::path out = out_s.empty() ? default_out() : fs::path(out_s);
    return dispatch_experiment(doc.at("id"), doc.at("config"), out);
}

int dispatch_experiment(const std::string& id, const json& cfg, const fs::path& out) {
    if (id == "constants") {
        CommonOpts c;
        c.family = cfg.at("family");
        c.out = out.string();
        return run_constants(c, cfg.at("j"));
    }
    auto model = occ::WeightModel::parse(cfg.at("family"));
    if (id == "ratio_convergence") {
        auto kind = cfg.value("kind", "exactly_j") == "at_least_j"
                        ? occ::CountKind::AtLeastJ
                        : occ::CountKind::ExactlyJ;
        auto rep = occ::ratio_convergence(model, cfg.at("j"),
                                          occ::GridSpec::parse(cfg.at("grid")), kind);
        return finish_report(rep, out);
    }
    if (id == "clt_check") {
        auto rep = occ::clt_check(model, cfg.at("j"), cfg.at("t"),
                                  cfg.at("replicates"), cfg.at("seed"));
        return finish_report(rep, out);
    }
    if (id == "depoissonization_check") {
        auto rep = occ::depoissonization_check(
            model, cfg.at("j"), cfg.at("n_grid").get<std::vector<double>>(),
            cfg.value("k_cap", std::int64_t(20000)));
        return finish_report(rep, out);
    }
    if (id == "variance_window") {
        auto rep = occ::variance_window(model, cfg.at("j"),
                                        occ::GridSpec::parse(cfg.at("grid")));
        return finish_report(rep, out);
    }
    if (id == "lil_paths") {
        auto rep = occ::lil_paths(model, cfg.at("j"),
                                  occ::GridSpec::parse(cfg.at("grid")),
                                  cfg.at("replicates"), cfg.at("seed"));
        return finish_report(rep, out);
    }
    std::cerr << "replay: unknown experiment id '" << id << "'\n";
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"occupancy toolkit: exact moments, asymptotics, simulation"};
    app.require_subcommand(1);

    CommonOpts c_const, c_mom, c_sim, c_clt, c_lil, c_dep, c_win, c_ratio;
    std::string j_range = "1..5";
    unsigned j = 1, j_max = 5;
    double t = 1e6;
    std::string kind_s = "exact", grid_s, domain_s = "time", n_grid_s, ratio_kind =
                                                                          "exactly_j";
    std::uint64_t reps = 200, n_balls = 0;
    std::int64_t k_cap = 20000;
    std::string replay_file, replay_out;
    bool emit_svg = false;

    auto* constants = app.add_subcommand("constants", "regime constants per j");
    add_common(constants, c_const, false);
    constants->add_option("--j", j_range, "j or range lo..hi");

    auto* moments = app.add_subcommand("moments", "exact mean/variance");
    add_common(moments, c_mom, false);
    moments->add_option("--j", j, "count order j")->required();
    moments->add_option("--t", t, "Poissonized time");
    moments->add_option("--n", n_balls, "fixed ball count (binomial scheme)");
    moments->add_option("--kind", kind_s, "exact|atleast");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths");
    add_common(simulate, c_sim);
    simulate->add_option("--grid", grid_s, "geometric:t0:t1:count")->required();
    simulate->add_option("--domain", domain_s, "time|balls");
    simulate->add_option("--j-max", j_max, "largest count order reported");
    simulate->add_option("-M,--replicates", reps, "replicates");

    auto* clt = app.add_subcommand("clt", "CLT check against the standard normal");
    add_common(clt, c_clt);
    clt->add_option("--j", j, "count order j")->required();
    clt->add_option("--t", t, "Poissonized time")->required();
    clt->add_option("-M,--replicates", reps, "replicates");

    auto* lil = app.add_subcommand("lil", "LIL path statistics on coupled paths");
    add_common(lil, c_lil);
    lil->add_option("--j", j, "count order j")->required();
    lil->add_option("--grid", grid_s, "geometric:t0:t1:count")->required();
    lil->add_option("-M,--replicates", reps, "replicates");
    lil->add_flag("--svg", emit_svg, "emit envelope SVG chart");

    auto* dep = app.add_subcommand("depoisson", "fixed-n vs Poissonized moments");
    add_common(dep, c_dep, false);
    dep->add_option("--j", j, "count order j")->required();
    dep->add_option("--n-grid", n_grid_s, "grid spec for ball counts")->required();
    dep->add_option("--k-cap", k_cap, "certified pair cap for the cross sum");

    auto* win = app.add_subcommand("window", "variance window concentration");
    add_common(win, c_win, false);
    win->add_option("--j", j, "count order j")->required();
    win->add_option("--grid", grid_s, "geometric:t0:t1:count")->required();

    auto* ratio = app.add_subcommand("ratio", "exact vs asymptotic ratio curves");
    add_common(ratio, c_ratio, false);
    ratio->add_option("--j", j, "count order j")->required();
    ratio->add_option("--grid", grid_s, "geometric:t0:t1:count")->required();
    ratio->add_option("--kind", ratio_kind, "exactly_j|at_least_j");
    ratio->add_flag("--svg", emit_svg, "emit ratio SVG chart");

    auto* replay = app.add_subcommand("replay", "re-run an experiment from report.json");
    replay->add_option("report", replay_file, "path to report.json")->required();
    replay->add_option("--out", replay_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (constants->parsed()) return run_constants(c_const, j_range);
        if (moments->parsed()) return run_moments(c_mom, j, t, kind_s, n_balls);
        if (simulate->parsed()) {
            apply_threads(c_sim.threads);
            return run_simulate(c_sim, grid_s, domain_s, j_max, reps);
        }
        if (clt->parsed()) {
            apply_threads(c_clt.threads);
            auto model = occ::WeightModel::parse(c_clt.family);
            auto rep = occ::clt_check(model, j, t, reps, c_clt.seed);
            return finish_report(rep, c_clt.out.empty() ? default_out()
                                                        : fs::path(c_clt.out));
        }
        if (lil->parsed()) {
            apply_threads(c_lil.threads);
            auto model = occ::WeightModel::parse(c_lil.family);
            auto rep = occ::lil_paths(model, j, occ::GridSpec::parse(grid_s), reps,
                                      c_lil.seed);
            fs::path out = c_lil.out.empty() ? default_out() : fs::path(c_lil.out);
            int code = finish_report(rep, out);
            if (emit_svg)
                if (const auto* env = rep.table("envelope"))
                    occ::write_svg_chart(*env, "n",
                                         {"env_max_fixed", "env_min_fixed",
                                          "env_max_poisson", "env_min_poisson"},
                                         true, "LIL envelope", out / "envelope.svg");
            return code;
        }
        if (dep->parsed()) {
            apply_threads(c_dep.threads);
            auto model = occ::WeightModel::parse(c_dep.family);
            auto rep = occ::depoissonization_check(
                model, j, occ::GridSpec::parse(n_grid_s).values, k_cap);
            return finish_report(rep, c_dep.out.empty() ? default_out()
                                                        : fs::path(c_dep.out));
        }
        if (win->parsed()) {
            auto model = occ::WeightModel::parse(c_win.family);
            auto rep = occ::variance_window(model, j, occ::GridSpec::parse(grid_s));
            return finish_report(rep, c_win.out.empty() ? default_out()
                                                        : fs::path(c_win.out));
        }
        if (ratio->parsed()) {
            auto model = occ::WeightModel::parse(c_ratio.family);
            auto kind = ratio_kind == "at_least_j" ? occ::CountKind::AtLeastJ
                                                   : occ::CountKind::ExactlyJ;
            auto rep =
                occ::ratio_convergence(model, j, occ::GridSpec::parse(grid_s), kind);
            fs::path out = c_ratio.out.empty() ? default_out() : fs::path(c_ratio.out);
            int code = finish_report(rep, out);
            if (emit_svg)
                if (const auto* tbl = rep.table("ratios"))
                    occ::write_svg_chart(*tbl, "t", {"mean_ratio", "var_ratio"}, true,
                                         "exact / asymptotic", out / "ratios.svg");
            return code;
        }
        if (replay->parsed()) return run_replay(replay_file, replay_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
