#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "occ/experiments.hpp"
#include "occ/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace occ;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("grid specs: parse, endpoints, monotonicity, rejection") {
    auto g = GridSpec::parse("geometric:10:1e4:5");
    CHECK(g.values.size() == 5);
    CHECK(g.values.front() == doctest::Approx(10.0));
    CHECK(g.values.back() == doctest::Approx(1e4));
    for (std::size_t i = 0; i + 1 < g.values.size(); ++i)
        CHECK(g.values[i] < g.values[i + 1]);
    // spec string round-trips
    CHECK(GridSpec::parse(g.spec_string).values == g.values);

    // tau with mu > 1: log w_n grows like ((1+gamma)/(mu-1)) log n
    auto tp = GridSpec::tau(1.0, 3.0, 0.0, 20);
    CHECK(tp.values[3] == doctest::Approx(std::pow(4.0, 1.0)));
    // tau with mu = 1: exp(n^2)-type levels, successive ratios increase
    auto t1 = GridSpec::tau(1.0, 1.0, 0.0, 6);
    double prev_ratio = 1.0;
    for (std::size_t i = 0; i + 1 < t1.values.size(); ++i) {
        double r = t1.values[i + 1] / t1.values[i];
        CHECK(r > prev_ratio);
        prev_ratio = r;
    }

    CHECK_THROWS_AS(GridSpec::parse("geometric:10:5:4"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::parse("geometric:10:100"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::parse("banana:1:2:3"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::parse("geometric:a:b:3"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::tau(-1.0, 2.0, 0.0, 5), std::invalid_argument);
}

TEST_CASE("ratio convergence: verdicts recomputable from the emitted table") {
    auto rep = ratio_convergence(WeightModel::zipf(0.5), 1,
                                 GridSpec::geometric(1e4, 1e8, 5));
    CHECK(rep.id == "ratio_convergence");
    const Table* t = rep.table("ratios");
    REQUIRE(t != nullptr);
    REQUIRE(t->rows.size() == 5);
    // columns: t, mean_exact, var_exact, mean_theory, var_theory, mean_ratio, var_ratio
    for (const auto& row : t->rows) {
        CHECK(row[5] == doctest::Approx(row[1] / row[3]).epsilon(1e-12));
        CHECK(row[6] == doctest::Approx(row[2] / row[4]).epsilon(1e-12));
    }
    const VerdictRow* mv = rep.verdict("mean_ratio");
    REQUIRE(mv != nullptr);
    // Zipf small counts converge fast; 5% at 1e8 holds with a wide margin
    CHECK(mv->verdict == Verdict::Pass);
    CHECK(std::fabs(t->rows.back()[5] - 1.0) < 0.05);
    CHECK(rep.verdict("var_ratio")->verdict == Verdict::Pass);
    CHECK_FALSE(rep.failed());
}

TEST_CASE("clt check is inconclusive when the variance is too small") {
    auto rep = clt_check(WeightModel::finite({0.5, 0.5}), 1, 2.0, 2000, 1);
    const VerdictRow* v = rep.verdict("ks_normal");
    REQUIRE(v != nullptr);
    CHECK(v->verdict == Verdict::Inconclusive);
    CHECK_FALSE(rep.failed()); // inconclusive is not a failure
}

TEST_CASE("clt check passes on a healthy case and reports its sample stats") {
    auto rep = clt_check(WeightModel::zipf(0.5), 1, 1e5, 2000, 7);
    CHECK(rep.verdict("ks_normal")->verdict == Verdict::Pass);
    const Table* s = rep.table("summary");
    REQUIRE(s != nullptr);
    REQUIRE(s->rows.size() == 1);
}

TEST_CASE("de-Poissonization: gaps shrink and the variance ratio is banded") {
    auto rep = depoissonization_check(WeightModel::zipf(0.5), 1,
                                      {100.0, 1000.0, 10000.0});
    CHECK(rep.verdict("mean_gap_decreasing")->verdict == Verdict::Pass);
    CHECK(rep.verdict("var_ratio_band")->verdict == Verdict::Pass);
}

TEST_CASE("variance window: fractions recomputable and increasing") {
    auto rep = variance_window(WeightModel::zipf(0.5), 1,
                               GridSpec::geometric(1e3, 1e6, 4));
    const Table* t = rep.table("window");
    REQUIRE(t != nullptr);
    for (const auto& row : t->rows) {
        CHECK(row[3] == doctest::Approx(row[2] / row[1]).epsilon(1e-12));
        CHECK(row[3] > 0.0);
        CHECK(row[3] <= 1.0);
    }
    CHECK(rep.verdict("fraction_increasing")->verdict == Verdict::Pass);
}

TEST_CASE("lil paths: short grids yield inconclusive verdicts, long ones verdicts") {
    auto short_rep = lil_paths(WeightModel::zipf(0.5), 1,
                               GridSpec::geometric(10, 100, 3), 8, 1);
    CHECK(short_rep.verdict("envelope")->verdict == Verdict::Inconclusive);
    CHECK(short_rep.verdict("symmetry")->verdict == Verdict::Inconclusive);
    CHECK_FALSE(short_rep.failed());

    auto rep = lil_paths(WeightModel::zipf(0.5), 1,
                         GridSpec::geometric(1e2, 1e8, 14), 40, 2);
    const Table* s = rep.table("summary");
    REQUIRE(s != nullptr);
    CHECK(s->rows[0][6] >= 10.0); // valid_points
    const Table* env = rep.table("envelope");
    REQUIRE(env != nullptr);
    // the envelope brackets zero and the denominators grow with n
    double prev_denom = 0.0;
    for (const auto& row : env->rows) {
        CHECK(row[1] > prev_denom);
        prev_denom = row[1];
        CHECK(row[2] >= row[3]); // max >= min, fixed-n side
        CHECK(row[4] >= row[5]); // max >= min, Poissonized side
    }
    CHECK(rep.verdict("envelope")->verdict != Verdict::Inconclusive);
}

TEST_CASE("report writing is deterministic and self-consistent") {
    auto rep = ratio_convergence(WeightModel::zipf(0.5), 1,
                                 GridSpec::geometric(1e3, 1e5, 4));
    fs::path dir = fs::temp_directory_path() / "occ_report_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_report(rep, dir);
    write_manifest(rep.config_echo, dir);
    REQUIRE(fs::exists(dir / "report.json"));
    REQUIRE(fs::exists(dir / "ratio_convergence_ratios.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));
    std::string j1 = slurp(dir / "report.json");
    std::string c1 = slurp(dir / "ratio_convergence_ratios.csv");

    // a second, freshly computed run produces byte-identical files
    auto rep2 = ratio_convergence(WeightModel::zipf(0.5), 1,
                                  GridSpec::geometric(1e3, 1e5, 4));
    fs::path dir2 = fs::temp_directory_path() / "occ_report_test2";
    fs::remove_all(dir2);
    fs::create_directories(dir2);
    write_report(rep2, dir2);
    CHECK(slurp(dir2 / "report.json") == j1);
    CHECK(slurp(dir2 / "ratio_convergence_ratios.csv") == c1);

    // the CSV header matches the table columns
    std::istringstream is(c1);
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,mean_exact,var_exact,mean_theory,var_theory,mean_ratio,var_ratio");

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("per-replicate CSV: schema and determinism") {
    SimConfig cfg(WeightModel::zipf(0.5));
    cfg.grid = {100.0, 1000.0};
    cfg.j_max = 2;
    cfg.replicates = 5;
    cfg.seed = 9;
    auto paths = simulate_poisson(cfg);
    fs::path f = fs::temp_directory_path() / "occ_paths_test.csv";
    write_paths_csv(paths, cfg.j_max, f);
    std::string a = slurp(f);
    write_paths_csv(paths, cfg.j_max, f);
    CHECK(slurp(f) == a);
    std::istringstream is(a);
    std::string header;
    std::getline(is, header);
    CHECK(header == "replicate,grid_value,j,K_j,K_j_star,balls,overflow_count");
    std::size_t lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    CHECK(lines == cfg.replicates * cfg.grid.size() * cfg.j_max);
    fs::remove(f);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.0, -3.0, 0.1, 1.0 / 3.0, 6.02e23, 1e-12,
                     123456789.0, 0.7295626583,
                     std::nextafter(1.0, 2.0)}) {
        std::string s = format_number(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_number(42.0) == "42");
    CHECK(format_number(-7.0) == "-7");
}

TEST_CASE("svg chart holds only table data and valid markup") {
    Table t{"demo", {"x", "y"}, {{1.0, 2.0}, {10.0, 3.0}, {100.0, 2.5}}};
    fs::path f = fs::temp_directory_path() / "occ_chart_test.svg";
    write_svg_chart(t, "x", {"y"}, true, "demo chart", f);
    std::string s = slurp(f);
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("polyline") != std::string::npos);
    CHECK(s.find("demo chart") != std::string::npos);
    CHECK(s.rfind("</svg>") != std::string::npos);
    fs::remove(f);
}
