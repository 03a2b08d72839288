#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "msens/dataset.hpp"
#include "msens/estimation.hpp"
#include "msens/l2.hpp"
#include "msens/linf.hpp"

namespace msens {

// Critical value of the sup-|.| multiplier-bootstrap process over the grid:
// per replicate, one shared Rademacher draw per unit multiplies the centered,
// standardized influence values; the statistic is the sup over grid points of
// |sqrt(n) * mean|. Returns the empirical (1-alpha) quantile across reps.
// `ses` are standard errors (sigma/sqrt(n)); any zero entry is an error.
double multiplier_bootstrap(const Eigen::MatrixXd& per_unit_eif,
                            const std::vector<double>& estimates, const std::vector<double>& ses,
                            double alpha, int reps, std::uint64_t seed);

struct BandPoint {
    double param = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;      // pointwise normal CI
    double band_lo = 0.0, band_hi = 0.0;  // simultaneous band
};

struct BandResult {
    std::vector<double> grid;
    double critical_value = 0.0;
    double alpha = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
    std::vector<BandPoint> points;
};

BandResult build_band(const std::vector<double>& grid, const std::vector<PsiEstimate>& estimates,
                      double alpha, int reps, std::uint64_t seed);

// Bonferroni rectangle over the (psi1, psi2) pair: both marginal bands held
// jointly, reported at level 1 - 2 alpha.
struct PairBand {
    BandResult psi1;
    BandResult psi2;
    double joint_level = 0.0;
};

PairBand bonferroni_pair_band(const BandResult& band1, const BandResult& band2);

// --- ATE curve assembly ------------------------------------------------
// The control-side bound comes from the same estimator applied to the
// transformed sample (Z -> 1-Z, Y -> -Y, negate at the end), so an ATE bound
// is a per-unit sum of the two influence streams computed on one sample.

PsiEstimate combine_sum(const PsiEstimate& a, const PsiEstimate& b, const FoldPlan& folds);
PsiEstimate combine_weighted(double wa, const PsiEstimate& a, double wb, const PsiEstimate& b,
                             const FoldPlan& folds);

struct AteL2Point {
    double lambda = 0.0;
    PsiEstimate lower;             // ATE lower bound
    PsiEstimate upper;             // ATE upper bound
    PsiEstimate avg_sensitivity;   // treated/control mixture of psi1
};

std::vector<AteL2Point> estimate_ate_l2(const ObservationalDataset& data, const FoldPlan& folds,
                                        const std::vector<double>& lambda_grid,
                                        const AnalysisConfig& config,
                                        const NuisanceFactory* factory = nullptr);

struct AteLInfPoint {
    double gamma = 0.0;
    PsiEstimate lower;
    PsiEstimate upper;
};

std::vector<AteLInfPoint> estimate_ate_linf(const ObservationalDataset& data, const FoldPlan& folds,
                                            const std::vector<double>& gamma_grid,
                                            const AnalysisConfig& config,
                                            const NuisanceFactory* factory = nullptr);

}  // namespace msens
