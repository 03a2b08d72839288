#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msens/simulation.hpp"

namespace msens {

// Grid flag syntax: a single number, a comma list, or "lo:hi:step" inclusive
// of hi whenever hi lands on the step lattice.
std::vector<double> parse_grid(const std::string& text);

struct CurveExportRow {
    std::string framework;  // linf | l2 | ate
    std::string quantity;   // upper | lower | psi1 | psi2 | ate_lower | ate_upper | avg_sensitivity
    double param = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double band_lo = 0.0, band_hi = 0.0;
    double critical_value = 0.0;
    int n = 0;
    int K = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

void write_curve_csv(const std::string& path, const std::vector<CurveExportRow>& rows);
void write_curve_json(const std::string& path, const std::vector<CurveExportRow>& rows);

void write_study_csv(const std::string& path, const StudyReport& report);
void write_study_json(const std::string& path, const StudyReport& report);

// Smallest parameter at which the effect's lower band (or CI when bands are
// off) crosses zero, linearly interpolated between bracketing grid points.
// `lower_rows` is the effect's lower-bound curve in grid order; `psi1_rows`
// (optional, same grid) translates the crossing into an average sensitivity
// value.
struct ExplainAway {
    double param = 0.0;
    std::optional<double> psi1;
};

std::optional<ExplainAway> find_explain_away(const std::vector<CurveExportRow>& lower_rows,
                                             const std::vector<CurveExportRow>& psi1_rows,
                                             bool use_band);

// Gamma-distribution high-confidence interval on the propensity ratio given
// its second moment: mean 1, variance psi1 - 1, central (1 - alpha) interval.
std::pair<double, double> interpret_bound(double psi1, double alpha);

}  // namespace msens
