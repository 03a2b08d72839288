#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace msens {

// One observational study: covariate matrix X (n x d), binary treatment Z
// and real outcome Y. Immutable after construction; validated on load.
struct ObservationalDataset {
    Eigen::MatrixXd covariates;
    Eigen::VectorXi treatment;
    Eigen::VectorXd outcome;
    std::vector<std::string> column_names;

    int n() const { return static_cast<int>(outcome.size()); }
    int d() const { return static_cast<int>(covariates.cols()); }
    int treated_count() const { return treatment.sum(); }

    // Throws ValidationError unless: both treatment classes present, all
    // values finite, shapes consistent.
    void validate() const;
};

// Reads a headered CSV. Covariates are every column except the named
// treatment/outcome columns, kept in file order.
ObservationalDataset load_csv(const std::string& path, const std::string& treatment_col,
                              const std::string& outcome_col);

// Writes the dataset back out with full double precision (%.17g), so
// load -> save -> load reproduces identical bits.
void save_csv(const ObservationalDataset& data, const std::string& path,
              const std::string& treatment_col, const std::string& outcome_col);

// Deterministic K-fold partition: Fisher-Yates shuffle of 0..n-1 under the
// given seed, cut into K near-equal blocks (first n % K folds get one extra).
struct FoldPlan {
    std::vector<int> assignments;  // values in [1, K]
    int K = 0;
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(assignments.size()); }
    std::vector<std::vector<int>> fold_indices() const;
    std::vector<int> train_indices(int fold) const;  // complement of fold
};

FoldPlan make_folds(int n, int K, std::uint64_t seed);

// Shared analysis knobs. Grids strictly increasing; gamma grid > 1.
struct AnalysisConfig {
    std::vector<double> gamma_grid;
    std::vector<double> lambda_grid;
    double theta = 0.0;
    double alpha = 0.05;
    int bootstrap_reps = 2500;
    int K = 10;
    std::uint64_t seed = 1;
    double bandwidth_scale_x = 1.0;
    double bandwidth_scale_y = 1.0;
    int grid_points = 512;
    double propensity_clamp_lo = 0.01;
    double propensity_clamp_hi = 0.99;
    // two-step centering: kernel-smooth residuals around a linear outcome
    // mean instead of raw outcomes (removes mean-variation leakage into the
    // conditional spread)
    bool mean_shift = true;

    void validate() const;  // throws ConfigError
};

// Control-side transform: the estimator for E[Y(1)]-type targets applied to
// (Z -> 1-Z, Y -> -Y) yields, after negation, the matching bound for the
// control mean.
ObservationalDataset flip_treatment_negate_outcome(const ObservationalDataset& data);
ObservationalDataset negate_outcome(const ObservationalDataset& data);

}  // namespace msens
