#include "msens/export.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "msens/errors.hpp"
#include "msens/stats.hpp"

namespace msens {

namespace {

double parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ConfigError("cannot parse number '" + s + "' in grid spec");
    }
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    if (text.empty()) throw ConfigError("empty grid spec");
    if (text.find(':') != std::string::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos) {
            throw ConfigError("grid spec must be lo:hi:step");
        }
        const double lo = parse_number(text.substr(0, c1));
        const double hi = parse_number(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = parse_number(text.substr(c2 + 1));
        if (!(step > 0.0)) throw ConfigError("grid step must be positive");
        if (hi < lo) throw ConfigError("grid hi must be >= lo");
        std::vector<double> grid;
        const double tol = 1e-9 * step;
        for (int k = 0;; ++k) {
            const double v = lo + step * k;
            if (v > hi + tol) break;
            grid.push_back(v < hi ? v : hi);
            if (grid.size() > 100000) throw ConfigError("grid spec produces too many points");
        }
        return grid;
    }
    std::vector<double> grid;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        grid.push_back(parse_number(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw ConfigError("grid values must be strictly increasing");
    }
    return grid;
}

void write_curve_csv(const std::string& path, const std::vector<CurveExportRow>& rows) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write file: " + path);
    out << "framework,param,estimate,se,ci_lo,ci_hi,band_lo,band_hi,critical_value,n,K,alpha,seed,"
           "quantity\n";
    for (const auto& r : rows) {
        out << r.framework << ',' << fmt(r.param) << ',' << fmt(r.estimate) << ',' << fmt(r.se)
            << ',' << fmt(r.ci_lo) << ',' << fmt(r.ci_hi) << ',' << fmt(r.band_lo) << ','
            << fmt(r.band_hi) << ',' << fmt(r.critical_value) << ',' << r.n << ',' << r.K << ','
            << fmt(r.alpha) << ',' << r.seed << ',' << r.quantity << '\n';
    }
}

void write_curve_json(const std::string& path, const std::vector<CurveExportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"framework", r.framework},
                       {"quantity", r.quantity},
                       {"param", r.param},
                       {"estimate", r.estimate},
                       {"se", r.se},
                       {"ci_lo", r.ci_lo},
                       {"ci_hi", r.ci_hi},
                       {"band_lo", r.band_lo},
                       {"band_hi", r.band_hi},
                       {"critical_value", r.critical_value},
                       {"n", r.n},
                       {"K", r.K},
                       {"alpha", r.alpha},
                       {"seed", r.seed}});
    }
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write file: " + path);
    out << arr.dump(2) << '\n';
}

void write_study_csv(const std::string& path, const StudyReport& report) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write file: " + path);
    out << "metric,estimator,nuisance_config,n,family,param,value\n";
    for (const auto& c : report.cells) {
        out << c.metric << ',' << c.estimator << ',' << c.nuisance_config << ',' << c.n << ','
            << c.family << ',' << fmt(c.param) << ',' << fmt(c.value) << '\n';
    }
}

void write_study_json(const std::string& path, const StudyReport& report) {
    nlohmann::json obj;
    obj["reps"] = report.reps;
    obj["misspecify"] = report.misspecify;
    obj["seed"] = report.seed;
    obj["convention"] =
        report.convention == NormalConvention::Variance ? "variance" : "stddev";
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : report.cells) {
        arr.push_back({{"metric", c.metric},
                       {"estimator", c.estimator},
                       {"nuisance_config", c.nuisance_config},
                       {"n", c.n},
                       {"family", c.family},
                       {"param", c.param},
                       {"value", c.value}});
    }
    obj["cells"] = arr;
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write file: " + path);
    out << obj.dump(2) << '\n';
}

std::optional<ExplainAway> find_explain_away(const std::vector<CurveExportRow>& lower_rows,
                                             const std::vector<CurveExportRow>& psi1_rows,
                                             bool use_band) {
    if (lower_rows.empty()) return std::nullopt;
    auto lo_of = [&](const CurveExportRow& r) { return use_band ? r.band_lo : r.ci_lo; };

    std::optional<double> prev_param, prev_lo;
    std::optional<ExplainAway> hit;
    for (const auto& r : lower_rows) {
        const double lo = lo_of(r);
        if (lo <= 0.0) {
            ExplainAway out;
            if (prev_param && *prev_lo > 0.0) {
                const double t = *prev_lo / (*prev_lo - lo);
                out.param = *prev_param + t * (r.param - *prev_param);
            } else {
                out.param = r.param;
            }
            hit = out;
            break;
        }
        prev_param = r.param;
        prev_lo = lo;
    }
    if (!hit) return std::nullopt;
    if (!psi1_rows.empty()) {
        // interpolate psi1 at the crossing parameter
        const auto& rows = psi1_rows;
        if (hit->param <= rows.front().param) {
            hit->psi1 = rows.front().estimate;
        } else if (hit->param >= rows.back().param) {
            hit->psi1 = rows.back().estimate;
        } else {
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (rows[i].param >= hit->param) {
                    const double t =
                        (hit->param - rows[i - 1].param) / (rows[i].param - rows[i - 1].param);
                    hit->psi1 = rows[i - 1].estimate + t * (rows[i].estimate - rows[i - 1].estimate);
                    break;
                }
            }
        }
    }
    return hit;
}

std::pair<double, double> interpret_bound(double psi1, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
    if (psi1 < 1.0) throw DomainError("psi1 must be at least 1 (second moment of a mean-1 ratio)");
    if (psi1 == 1.0) return {1.0, 1.0};
    const double shape = 1.0 / (psi1 - 1.0);
    return {gamma_quantile(alpha / 2.0, shape, shape), gamma_quantile(1.0 - alpha / 2.0, shape, shape)};
}

}  // namespace msens
