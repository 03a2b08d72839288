#include "msens/linf.hpp"

#include <cmath>

#include "msens/errors.hpp"

namespace msens {

WeightBounds weight_bounds(double e, double gamma) {
    if (!(gamma > 1.0)) throw DomainError("gamma must exceed 1");
    if (!(e >= 0.0 && e <= 1.0)) throw DomainError("propensity must lie in [0,1]");
    WeightBounds w;
    w.lo = (1.0 - 1.0 / gamma) * e + 1.0 / gamma;
    w.hi = (1.0 - gamma) * e + gamma;
    return w;
}

LInfSolution quantile_balancing(const ConditionalDensity& density, double e, double gamma,
                                BoundSide side) {
    const WeightBounds w = weight_bounds(e, gamma);
    LInfSolution sol;
    sol.gamma = gamma;
    sol.side = side;
    sol.e = e;
    sol.w_minus = w.lo;
    sol.w_plus = w.hi;
    if (side == BoundSide::Upper) {
        sol.alpha_star = gamma / (1.0 + gamma);
        sol.w_below = w.lo;
        sol.w_above = w.hi;
    } else {
        sol.alpha_star = 1.0 / (1.0 + gamma);
        sol.w_below = w.hi;
        sol.w_above = w.lo;
    }
    sol.q = density.quantile(sol.alpha_star);
    sol.mu_minus = density.truncated_moment(1, sol.q, TruncSide::Below);
    sol.mu_plus = density.truncated_moment(1, sol.q, TruncSide::Above);

    // mass balance holds as an algebraic identity in e and gamma; a
    // violation means a non-finite input slipped through
    const double balance = sol.alpha_star * sol.w_below + (1.0 - sol.alpha_star) * sol.w_above;
    if (!(std::abs(balance - 1.0) <= 1e-12)) {
        throw DomainError("quantile balancing lost the unit-mass identity");
    }
    return sol;
}

double eif_phi(const LInfSolution& sol, int z, double y) {
    const double gamma = sol.gamma;
    // affine coefficients of each envelope weight in e: W = a e + b
    const double a_plus = 1.0 - gamma, b_plus = gamma;
    const double a_minus = 1.0 - 1.0 / gamma, b_minus = 1.0 / gamma;
    const bool upper = sol.side == BoundSide::Upper;
    const double a_above = upper ? a_plus : a_minus;
    const double b_above = upper ? b_plus : b_minus;
    const double a_below = upper ? a_minus : a_plus;
    const double b_below = upper ? b_minus : b_plus;

    const double above = y > sol.q ? 1.0 : 0.0;
    const double below = y < sol.q ? 1.0 : 0.0;
    const double zz = static_cast<double>(z);
    const double ratio = zz / sol.e;

    const double phi_above =
        ratio * sol.w_above *
            ((1.0 - sol.alpha_star - above) * sol.q + y * above - sol.mu_plus) +
        (a_above * zz + b_above) * sol.mu_plus;
    const double phi_below =
        ratio * sol.w_below * ((sol.alpha_star - below) * sol.q + y * below - sol.mu_minus) +
        (a_below * zz + b_below) * sol.mu_minus;
    return phi_above + phi_below;
}

LInfCurve estimate_psi(const ObservationalDataset& data, const FoldPlan& folds,
                       const std::vector<double>& gamma_grid, BoundSide side,
                       const AnalysisConfig& config, const NuisanceFactory* factory) {
    if (gamma_grid.empty()) throw ConfigError("gamma grid is empty");
    for (double g : gamma_grid) {
        if (!(g > 1.0)) throw ConfigError("gamma grid values must exceed 1");
    }
    const NuisanceFactory fac = factory ? *factory : default_nuisance_factory(config);

    const int G = static_cast<int>(gamma_grid.size());
    CrossFitEvaluator evaluator;
    evaluator.columns = G;
    evaluator.eval = [&gamma_grid, side, G](const ConditionalDensity& density, double e,
                                            const Eigen::RowVectorXd&, int z, double y,
                                            Eigen::Ref<Eigen::RowVectorXd> out) {
        for (int g = 0; g < G; ++g) {
            const LInfSolution sol = quantile_balancing(density, e, gamma_grid[g], side);
            out[g] = eif_phi(sol, z, y);
        }
    };

    const Eigen::MatrixXd eif = cross_fit(data, folds, fac, evaluator);
    LInfCurve curve;
    curve.gamma_grid = gamma_grid;
    curve.side = side;
    curve.estimates.reserve(gamma_grid.size());
    for (int g = 0; g < G; ++g) curve.estimates.push_back(pool_cross_fitted(eif.col(g), folds));
    return curve;
}

}  // namespace msens
