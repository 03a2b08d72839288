#pragma once

#include <vector>

#include "msens/dataset.hpp"
#include "msens/density.hpp"
#include "msens/estimation.hpp"

namespace msens {

enum class BoundSide { Upper, Lower };

// Odds-ratio weight envelope at propensity e: the admissible propensity
// ratio lies in [lo, hi] with lo = (1 - 1/gamma) e + 1/gamma and
// hi = (1 - gamma) e + gamma.
struct WeightBounds {
    double lo = 1.0;
    double hi = 1.0;
};

WeightBounds weight_bounds(double e, double gamma);  // DomainError if gamma <= 1

// Quantile-balancing solution for one covariate value: the optimal ratio
// jumps between the two envelope weights at the conditional quantile q whose
// level alpha_star makes the ratio integrate to one exactly:
//   alpha_star * w_below + (1 - alpha_star) * w_above == 1.
// Upper bound: alpha_star = gamma/(1+gamma), w_below = W-, w_above = W+.
// Lower bound: alpha_star = 1/(1+gamma) with the weights swapped.
struct LInfSolution {
    double gamma = 0.0;
    BoundSide side = BoundSide::Upper;
    double alpha_star = 0.0;
    double e = 0.0;
    double q = 0.0;        // conditional quantile at alpha_star
    double w_minus = 1.0;  // envelope
    double w_plus = 1.0;
    double w_below = 1.0;  // weight taken on {y < q}
    double w_above = 1.0;  // weight taken on {y > q}
    double mu_plus = 0.0;  // E[Y 1{Y > q} | x]
    double mu_minus = 0.0; // E[Y 1{Y < q} | x]

    double plug_in() const { return w_above * mu_plus + w_below * mu_minus; }
    double h_star(double y) const { return y < q ? w_below : (y > q ? w_above : 1.0); }
};

LInfSolution quantile_balancing(const ConditionalDensity& density, double e, double gamma,
                                BoundSide side);

// Uncentered efficient influence value at observation (z, y) for the bound
// the solution row describes.
double eif_phi(const LInfSolution& sol, int z, double y);

struct LInfCurve {
    std::vector<double> gamma_grid;
    BoundSide side = BoundSide::Upper;
    std::vector<PsiEstimate> estimates;  // one per grid point
};

// Cross-fitted one-step estimates over a gamma grid. All grid points share
// each fold's nuisance fit; only the balancing quantile moves with gamma.
LInfCurve estimate_psi(const ObservationalDataset& data, const FoldPlan& folds,
                       const std::vector<double>& gamma_grid, BoundSide side,
                       const AnalysisConfig& config, const NuisanceFactory* factory = nullptr);

}  // namespace msens
