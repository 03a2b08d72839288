#pragma once

#include <optional>
#include <vector>

#include "msens/dataset.hpp"
#include "msens/density.hpp"
#include "msens/estimation.hpp"

namespace msens {

// Per-covariate solution of the trade-off program at fixed multiplier
// lambda > 0: the optimal ratio is h*(y) = lambda (xi - y) on {y <= xi} where
// xi makes h* integrate to one, i.e. deficit(xi) = 1/lambda.
struct L2Solution {
    double lambda = 0.0;
    double xi = 0.0;
    double t0 = 0.0;  // E[1{Y <= xi} | x]
    double t1 = 0.0;  // E[Y 1{Y <= xi} | x]
    double t2 = 0.0;  // E[Y^2 1{Y <= xi} | x]
    double cond_mean = 0.0;
    double eh2 = 0.0;  // E[h*^2 | x] = lambda^2 (xi^2 t0 - 2 xi t1 + t2)
    double ehy = 0.0;  // E[h* Y | x] = lambda (xi t1 - t2)

    double h_star(double y) const { return y <= xi ? lambda * (xi - y) : 0.0; }
    double pi(double y) const { return (1.0 - h_star(y)) / t0; }
};

// Bisection root of f(xi) = deficit(xi) - 1/lambda on the bracket
// [grid_min, grid_max + 1/lambda + 1]. `warm_upper` (a root at a smaller
// lambda) tightens the upper end since xi decreases in lambda.
double root_lagrangian(const ConditionalDensity& density, double lambda,
                       std::optional<double> warm_upper = std::nullopt);

L2Solution solve_lagrangian(const ConditionalDensity& density, double lambda,
                            std::optional<double> warm_upper = std::nullopt);

// Sensitivity-value program at outcome shift theta > 0: xi solves the ratio
// equation f_theta(xi) = 0 and the unit-specific multiplier is
// lambda_x = 1 / deficit(xi).
struct SensitivityValueSolution {
    double theta = 0.0;
    double xi = 0.0;
    double lambda_x = 0.0;
    double t0 = 0.0, t1 = 0.0, t2 = 0.0;
    double cond_mean = 0.0;
    double eh2 = 0.0;

    double h_star(double y) const { return y <= xi ? lambda_x * (xi - y) : 0.0; }
};

SensitivityValueSolution solve_sensitivity_value(const ConditionalDensity& density, double theta);

// Uncentered efficient influence values (lagrangian mode).
double eif_phi1(const L2Solution& sol, int z, double y, double e);
double eif_phi2(const L2Solution& sol, int z, double y, double e);

// Uncentered efficient influence value for the average sensitivity value at
// fixed theta (sensitivity-value mode).
double eif_phi0(const SensitivityValueSolution& sol, int z, double y, double e);

enum class OutcomeSign { Minimize, Maximize };

struct L2CurvePoint {
    double lambda = 0.0;
    PsiEstimate psi1;  // average sensitivity value
    PsiEstimate psi2;  // outcome bound
};

// Cross-fitted one-step curve over a lambda grid (lambda = 0 allowed: the
// ratio degenerates to 1 there). Maximize runs the minimize machinery on the
// negated outcome and flips psi2 back at the end; psi1 is sign-invariant.
std::vector<L2CurvePoint> estimate_l2_curve(const ObservationalDataset& data, const FoldPlan& folds,
                                            const std::vector<double>& lambda_grid, OutcomeSign sign,
                                            const AnalysisConfig& config,
                                            const NuisanceFactory* factory = nullptr);

// Average sensitivity value at the fixed hypothesis shift theta.
// theta <= 0 is solved by the unit ratio: estimate 1 with zero variance.
PsiEstimate estimate_psi0(const ObservationalDataset& data, const FoldPlan& folds, double theta,
                          const AnalysisConfig& config, const NuisanceFactory* factory = nullptr);

}  // namespace msens
