#pragma once

// File formats used by the CLI. Numbers are written with %.17g (round-trip
// exact for doubles, '.' decimal, no trailing whitespace, LF endings) so that
// equal inputs produce byte-identical files and canonical files survive a
// read/write cycle unchanged.
//
//   dataset CSV               header "x,y,dy", one point per row
//   curve CSV                 header "x,y_fit"
//   parallel-coordinates CSV  header "experiment,b0,b1,..."
//   fit report JSON           keys a, b, chi2, chi2_augmented, errors_b,
//                             status, iterations
//   ensemble summary JSON     failure rate, per-status counts, retained
//                             medians

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varpro/ensemble.hpp"
#include "varpro/errors.hpp"
#include "varpro/fit.hpp"
#include "varpro/linalg.hpp"

namespace varpro {

// Shortest %g form (up to 17 significant digits) that parses back to the
// same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

inline std::string dataset_to_csv(const Dataset& data) {
    std::string out = "x,y,dy\n";
    for (const DataPoint& p : data.points()) {
        out += format_double(p.x);
        out += ',';
        out += format_double(p.y);
        out += ',';
        out += format_double(p.dy);
        out += '\n';
    }
    return out;
}

inline Dataset dataset_from_csv(std::string_view text, std::string_view origin = "<csv>") {
    std::vector<DataPoint> pts;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> IoError {
        std::ostringstream os;
        os << origin << ":" << lineno << ": " << why;
        return IoError(os.str());
    };
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "x,y,dy") throw fail("expected header 'x,y,dy'");
            continue;
        }
        std::vector<std::string> cells;
        std::size_t fpos = 0;
        while (true) {
            const std::size_t comma = line.find(',', fpos);
            if (comma == std::string_view::npos) {
                cells.emplace_back(line.substr(fpos));
                break;
            }
            cells.emplace_back(line.substr(fpos, comma - fpos));
            fpos = comma + 1;
        }
        if (cells.size() != 3) throw fail("expected 3 comma-separated fields");
        double f[3];
        for (std::size_t c = 0; c < 3; ++c) {
            try {
                std::size_t used = 0;
                f[c] = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
            } catch (const std::exception&) {
                throw fail("malformed number '" + cells[c] + "'");
            }
        }
        try {
            pts.emplace_back(f[0], f[1], f[2]);
        } catch (const ValueError& e) {
            throw fail(e.what());
        }
    }
    if (pts.empty()) throw IoError(std::string(origin) + ": no data rows");
    return Dataset(std::move(pts));
}

inline std::string curve_to_csv(const std::vector<std::pair<double, double>>& samples) {
    std::string out = "x,y_fit\n";
    for (const auto& [x, y] : samples) {
        out += format_double(x);
        out += ',';
        out += format_double(y);
        out += '\n';
    }
    return out;
}

inline std::string parallel_coordinates_to_csv(
    const std::vector<std::pair<std::size_t, Vector>>& table) {
    const std::size_t nb = table.front().second.size();
    std::string out = "experiment";
    for (std::size_t j = 0; j < nb; ++j) out += ",b" + std::to_string(j);
    out += '\n';
    for (const auto& [index, b] : table) {
        out += std::to_string(index);
        for (std::size_t j = 0; j < nb; ++j) {
            out += ',';
            out += format_double(b[j]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json fit_report_json(const FitResult& result,
                                      const std::vector<double>* errors_b) {
    nlohmann::json j;
    j["a"] = result.a.entries();
    j["b"] = result.b.entries();
    j["chi2"] = result.chi2;
    j["chi2_augmented"] = result.chi2_augmented;
    if (errors_b) {
        j["errors_b"] = *errors_b;
    } else {
        j["errors_b"] = nullptr;
    }
    j["status"] = "converged";
    j["iterations"] = result.iterations;
    j["descent_reversions"] = result.descent_reversions;
    j["n_points"] = result.n_points;
    j["n_params"] = result.n_params;
    return j;
}

inline nlohmann::json ensemble_summary_json(const EnsembleReport& report) {
    nlohmann::json j;
    j["n_experiments"] = report.outcomes.size();
    j["failure_rate"] = report.failure_rate;
    nlohmann::json counts;
    for (FitStatus s : {FitStatus::converged, FitStatus::no_convergence,
                        FitStatus::unstable_solution, FitStatus::singular_hessian,
                        FitStatus::stalled_descent, FitStatus::singular_normal_equations,
                        FitStatus::evaluation_error}) {
        counts[std::string(to_string(s))] = report.count(s);
    }
    j["status_counts"] = counts;
    j["retained"] = report.retained_b_table.size();
    if (!report.retained_b_table.empty()) {
        const std::size_t nb = report.retained_b_table.front().second.size();
        std::vector<double> medians(nb);
        for (std::size_t c = 0; c < nb; ++c) {
            std::vector<double> col;
            col.reserve(report.retained_b_table.size());
            for (const auto& [idx, b] : report.retained_b_table) col.push_back(b[c]);
            std::sort(col.begin(), col.end());
            const std::size_t m = col.size();
            medians[c] = (m % 2) ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
        }
        j["retained_medians_b"] = medians;
    } else {
        j["retained_medians_b"] = nullptr;
    }
    return j;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace varpro
