#include "occ/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace occ {

namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary); // binary: no platform newline games
    if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
    return os;
}

void write_table_csv(const Table& t, const std::filesystem::path& file) {
    auto os = open_out(file);
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << (c ? "," : "") << t.columns[c];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << format_number(row[c]);
        os << "\n";
    }
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    // Integers (counts, grid indices) print without an exponent.
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof probe, "%.*g", prec, v);
        if (std::strtod(probe, nullptr) == v) return probe;
    }
    return buf;
}

void write_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json doc;
    doc["id"] = rep.id;
    doc["config"] = json::parse(rep.config_echo.empty() ? "{}" : rep.config_echo);
    // runtime_seconds deliberately stays out of the file: reruns with the
    // same seed/config must produce byte-identical JSON.
    doc["seed"] = rep.seed;
    json verdicts = json::object();
    for (const auto& v : rep.verdicts)
        verdicts[v.name] = json{{"verdict", verdict_name(v.verdict)},
                                {"detail", v.detail}};
    doc["verdicts"] = verdicts;
    json tables = json::object();
    for (const auto& t : rep.tables) {
        tables[t.name] = json{{"columns", t.columns},
                              {"csv", rep.id + "_" + t.name + ".csv"}};
        write_table_csv(t, dir / (rep.id + "_" + t.name + ".csv"));
    }
    doc["tables"] = tables;
    auto os = open_out(dir / "report.json");
    os << doc.dump(2) << "\n";
}

void write_paths_csv(const std::vector<ReplicatePath>& paths, unsigned j_max,
                     const std::filesystem::path& file) {
    auto os = open_out(file);
    os << "replicate,grid_value,j,K_j,K_j_star,balls,overflow_count\n";
    for (const auto& p : paths) {
        for (const auto& pt : p.points) {
            for (unsigned j = 1; j <= j_max; ++j) {
                os << p.replicate << "," << format_number(pt.grid_value) << "," << j
                   << "," << pt.k_least[j - 1] << "," << pt.k_exact[j - 1] << ","
                   << pt.balls << "," << pt.overflow << "\n";
            }
        }
    }
}

void write_manifest(const std::string& resolved_config_json,
                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json doc;
    doc["schema_version"] = kManifestSchemaVersion;
    doc["tool_version"] = kToolVersion;
    doc["config"] =
        json::parse(resolved_config_json.empty() ? "{}" : resolved_config_json);
    auto os = open_out(dir / "manifest.json");
    os << doc.dump(2) << "\n";
}

void write_svg_chart(const Table& table, const std::string& x_column,
                     const std::vector<std::string>& y_columns, bool log_x,
                     const std::string& title, const std::filesystem::path& file) {
    auto col_index = [&](const std::string& name) -> std::size_t {
        auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end())
            throw std::invalid_argument("svg chart: no column '" + name + "'");
        return std::size_t(it - table.columns.begin());
    };
    const std::size_t xi = col_index(x_column);
    std::vector<std::size_t> yi;
    for (const auto& name : y_columns) yi.push_back(col_index(name));

    const double W = 720, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto xval = [&](double v) { return log_x ? std::log10(v) : v; };
    for (const auto& row : table.rows) {
        double x = xval(row[xi]);
        if (!std::isfinite(x)) continue;
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        for (std::size_t c : yi) {
            if (!std::isfinite(row[c])) continue;
            ymin = std::min(ymin, row[c]);
            ymax = std::max(ymax, row[c]);
        }
    }
    if (xmax <= xmin || ymax <= ymin) {
        xmax = xmin + 1;
        ymax = ymin + 1;
    }
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (xval(x) - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    auto os = open_out(file);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
       << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"16\">"
       << title << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
       << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << H - mb << "\" stroke=\"black\"/>\n";
    // axis end labels
    os << "<text x=\"" << ml << "\" y=\"" << H - mb + 18
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(log_x ? std::pow(10.0, xmin) : xmin) << "</text>\n";
    os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(log_x ? std::pow(10.0, xmax) : xmax) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(ymin) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(ymax) << "</text>\n";
    for (std::size_t s = 0; s < yi.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << palette[s % 6]
           << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : table.rows) {
            if (!std::isfinite(row[xi]) || !std::isfinite(row[yi[s]])) continue;
            os << format_number(px(row[xi])) << "," << format_number(py(row[yi[s]]))
               << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 16 + 14 * double(s)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
              "fill=\""
           << palette[s % 6] << "\">" << y_columns[s] << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace occ
