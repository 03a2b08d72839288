#include "msens/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "msens/errors.hpp"
#include "msens/rng.hpp"

namespace msens {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace and CR
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& s, int row, const std::string& col) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("non-numeric value '" + s + "' in column '" + col + "' at row " +
                         std::to_string(row));
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value in column '" + col + "' at row " + std::to_string(row));
    }
    return value;
}

}  // namespace

void ObservationalDataset::validate() const {
    const int rows = n();
    if (rows < 2) throw ValidationError("dataset needs at least 2 rows");
    if (treatment.size() != rows || covariates.rows() != rows) {
        throw ValidationError("dataset columns have inconsistent lengths");
    }
    if (static_cast<int>(column_names.size()) != d()) {
        throw ValidationError("covariate name count does not match covariate columns");
    }
    bool any0 = false, any1 = false;
    for (int i = 0; i < rows; ++i) {
        const int z = treatment[i];
        if (z != 0 && z != 1) {
            throw ValidationError("treatment value " + std::to_string(z) + " outside {0,1} at row " +
                                  std::to_string(i + 1));
        }
        any0 |= z == 0;
        any1 |= z == 1;
        if (!std::isfinite(outcome[i])) {
            throw ValidationError("non-finite outcome at row " + std::to_string(i + 1));
        }
    }
    if (!any0 || !any1) throw ValidationError("treatment must contain both classes");
    if (!covariates.allFinite()) throw ValidationError("non-finite covariate value");
}

ObservationalDataset load_csv(const std::string& path, const std::string& treatment_col,
                              const std::string& outcome_col) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty file: " + path);
    const std::vector<std::string> header = split_line(line);

    int t_idx = -1, y_idx = -1;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        if (header[j] == treatment_col) t_idx = j;
        if (header[j] == outcome_col) y_idx = j;
    }
    if (t_idx < 0) throw SchemaError("missing treatment column '" + treatment_col + "'");
    if (y_idx < 0) throw SchemaError("missing outcome column '" + outcome_col + "'");
    if (t_idx == y_idx) throw SchemaError("treatment and outcome columns must differ");

    std::vector<int> cov_idx;
    std::vector<std::string> names;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        if (j == t_idx || j == y_idx) continue;
        cov_idx.push_back(j);
        names.push_back(header[j]);
    }

    std::vector<std::vector<double>> cov_rows;
    std::vector<int> z;
    std::vector<double> y;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                             " fields, expected " + std::to_string(header.size()));
        }
        const double zval = parse_cell(cells[t_idx], row, treatment_col);
        if (zval != 0.0 && zval != 1.0) {
            throw ValidationError("treatment value " + cells[t_idx] + " outside {0,1} at row " +
                                  std::to_string(row));
        }
        z.push_back(static_cast<int>(zval));
        y.push_back(parse_cell(cells[y_idx], row, outcome_col));
        std::vector<double> cov(cov_idx.size());
        for (std::size_t k = 0; k < cov_idx.size(); ++k) {
            cov[k] = parse_cell(cells[cov_idx[k]], row, names[k]);
        }
        cov_rows.push_back(std::move(cov));
    }

    ObservationalDataset data;
    data.column_names = std::move(names);
    const int n = static_cast<int>(z.size());
    const int d = static_cast<int>(data.column_names.size());
    data.covariates.resize(n, d);
    data.treatment.resize(n);
    data.outcome.resize(n);
    for (int i = 0; i < n; ++i) {
        data.treatment[i] = z[i];
        data.outcome[i] = y[i];
        for (int j = 0; j < d; ++j) data.covariates(i, j) = cov_rows[i][j];
    }
    data.validate();
    return data;
}

void save_csv(const ObservationalDataset& data, const std::string& path,
              const std::string& treatment_col, const std::string& outcome_col) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write file: " + path);
    out << treatment_col << ',' << outcome_col;
    for (const auto& name : data.column_names) out << ',' << name;
    out << '\n';
    char buf[40];
    for (int i = 0; i < data.n(); ++i) {
        out << data.treatment[i];
        std::snprintf(buf, sizeof buf, "%.17g", data.outcome[i]);
        out << ',' << buf;
        for (int j = 0; j < data.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.covariates(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

std::vector<std::vector<int>> FoldPlan::fold_indices() const {
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(K));
    for (int i = 0; i < n(); ++i) folds[static_cast<std::size_t>(assignments[i] - 1)].push_back(i);
    return folds;
}

std::vector<int> FoldPlan::train_indices(int fold) const {
    std::vector<int> idx;
    idx.reserve(assignments.size());
    for (int i = 0; i < n(); ++i) {
        if (assignments[i] != fold) idx.push_back(i);
    }
    return idx;
}

FoldPlan make_folds(int n, int K, std::uint64_t seed) {
    if (K < 2) throw ConfigError("fold count K must be at least 2");
    if (n < 2 * K) {
        throw ConfigError("n = " + std::to_string(n) + " is too small for K = " + std::to_string(K) +
                          " folds (need n >= 2K)");
    }
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0xF01D5));
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    FoldPlan plan;
    plan.K = K;
    plan.seed = seed;
    plan.assignments.assign(static_cast<std::size_t>(n), 0);
    const int base = n / K, extra = n % K;
    int pos = 0;
    for (int k = 1; k <= K; ++k) {
        const int size = base + (k <= extra ? 1 : 0);
        for (int s = 0; s < size; ++s) plan.assignments[static_cast<std::size_t>(perm[pos++])] = k;
    }
    return plan;
}

void AnalysisConfig::validate() const {
    auto check_grid = [](const std::vector<double>& g, const char* name, double min_allowed) {
        if (g.empty()) throw ConfigError(std::string(name) + " grid is empty");
        double prev = -std::numeric_limits<double>::infinity();
        for (double v : g) {
            if (!(v > prev)) throw ConfigError(std::string(name) + " grid must be strictly increasing");
            if (!(v >= min_allowed) || !std::isfinite(v)) {
                throw ConfigError(std::string(name) + " grid value out of range");
            }
            prev = v;
        }
    };
    if (!gamma_grid.empty()) {
        check_grid(gamma_grid, "gamma", std::nextafter(1.0, 2.0));
        if (gamma_grid.front() <= 1.0) throw ConfigError("gamma grid must start above 1");
    }
    if (!lambda_grid.empty()) check_grid(lambda_grid, "lambda", 0.0);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (bootstrap_reps < 100) throw ConfigError("bootstrap_reps must be at least 100");
    if (K < 2) throw ConfigError("fold count K must be at least 2");
    if (!(bandwidth_scale_x > 0.0) || !(bandwidth_scale_y > 0.0)) {
        throw ConfigError("bandwidth scales must be positive");
    }
    if (grid_points < 16) throw ConfigError("grid_points must be at least 16");
    if (!(propensity_clamp_lo > 0.0 && propensity_clamp_lo < propensity_clamp_hi &&
          propensity_clamp_hi < 1.0)) {
        throw ConfigError("propensity clamp must satisfy 0 < lo < hi < 1");
    }
}

ObservationalDataset flip_treatment_negate_outcome(const ObservationalDataset& data) {
    ObservationalDataset out = data;
    for (int i = 0; i < out.n(); ++i) out.treatment[i] = 1 - out.treatment[i];
    out.outcome = -out.outcome;
    return out;
}

ObservationalDataset negate_outcome(const ObservationalDataset& data) {
    ObservationalDataset out = data;
    out.outcome = -out.outcome;
    return out;
}

}  // namespace msens
