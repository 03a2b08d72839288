#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "msens/dataset.hpp"
#include "msens/density.hpp"
#include "msens/nuisance.hpp"

namespace msens {

// One-step estimate: the mean of cross-fitted uncentered influence values,
// with the fold-pooled variance (per-fold mean squared deviation around the
// fold mean, averaged over folds).
struct PsiEstimate {
    double value = 0.0;
    double se = 0.0;  // standard error, sigma_cf / sqrt(n)
    Eigen::VectorXd per_unit_eif;
    int n = 0;

    double ci_lo(double alpha) const;
    double ci_hi(double alpha) const;
};

PsiEstimate pool_cross_fitted(const Eigen::VectorXd& per_unit, const FoldPlan& folds);

// Nuisances handed to per-unit evaluators. `propensity` is already clamped.
struct NuisanceFit {
    std::function<double(const Eigen::RowVectorXd&)> propensity;
    std::shared_ptr<const ConditionalModel> outcome;
};

// Builds the fold-k nuisance fit from the training rows (all rows outside
// fold k). Swappable so studies can inject true nuisances.
using NuisanceFactory =
    std::function<NuisanceFit(const ObservationalDataset&, const std::vector<int>& train_rows)>;

// Default: IRLS logistic propensity + Nadaraya-Watson conditional model
// fitted on the treated training rows.
NuisanceFactory default_nuisance_factory(const AnalysisConfig& config);

// Per-unit evaluation against held-out nuisances. The evaluator fills
// `out` (width = columns()) for observation (x, z, y) given its conditional
// density and clamped propensity.
struct CrossFitEvaluator {
    int columns = 0;
    std::function<void(const ConditionalDensity&, double e, const Eigen::RowVectorXd& x, int z,
                       double y, Eigen::Ref<Eigen::RowVectorXd> out)>
        eval;
};

// Runs K-fold cross-fitting: for each fold, fits nuisances on the other
// folds and evaluates every held-out unit. Rows of the result follow dataset
// order. Folds are processed in parallel; the output is schedule-independent.
Eigen::MatrixXd cross_fit(const ObservationalDataset& data, const FoldPlan& folds,
                          const NuisanceFactory& factory, const CrossFitEvaluator& evaluator);

}  // namespace msens
