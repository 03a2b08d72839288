#include "msens/l2.hpp"

#include <cmath>

#include "msens/errors.hpp"

namespace msens {

namespace {

constexpr double kRootFTol = 1e-10;
constexpr double kRootWidthTol = 1e-10;

// Bisection on a strictly increasing f with f(lo) < 0 < f(hi).
template <typename F>
double bisect(F&& f, double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double v = f(mid);
        if (std::abs(v) < kRootFTol || (hi - lo) < kRootWidthTol * (1.0 + std::abs(mid))) return mid;
        if (v < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

// Full-depth variant for the ratio equation, whose slope can be very large
// when the target sits in a thin lower tail; only a small residual stops it.
template <typename F>
double bisect_to_residual(F&& f, double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 220 && lo < mid && mid < hi; ++it) {
        const double v = f(mid);
        if (std::abs(v) < kRootFTol) return mid;
        if (v < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
    }
    return mid;
}

}  // namespace

double root_lagrangian(const ConditionalDensity& density, double lambda,
                       std::optional<double> warm_upper) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive (lambda = 0 has ratio 1)");
    const double target = 1.0 / lambda;
    const double lo0 = density.grid_min();
    double hi = density.grid_max() + target + 1.0;
    if (warm_upper && *warm_upper < hi) {
        const double cand = *warm_upper + 1e-9;
        if (density.deficit(cand) - target >= 0.0) hi = cand;
    }
    return bisect([&](double xi) { return density.deficit(xi) - target; }, lo0, hi);
}

L2Solution solve_lagrangian(const ConditionalDensity& density, double lambda,
                            std::optional<double> warm_upper) {
    L2Solution sol;
    sol.lambda = lambda;
    sol.xi = root_lagrangian(density, lambda, warm_upper);
    sol.t0 = density.truncated_moment(0, sol.xi, TruncSide::Below);
    sol.t1 = density.truncated_moment(1, sol.xi, TruncSide::Below);
    sol.t2 = density.truncated_moment(2, sol.xi, TruncSide::Below);
    sol.cond_mean = density.mean();
    sol.eh2 = lambda * lambda * (sol.xi * sol.xi * sol.t0 - 2.0 * sol.xi * sol.t1 + sol.t2);
    sol.ehy = lambda * (sol.xi * sol.t1 - sol.t2);
    return sol;
}

SensitivityValueSolution solve_sensitivity_value(const ConditionalDensity& density, double theta) {
    if (!(theta > 0.0)) throw DomainError("theta must be positive (theta <= 0 has ratio 1)");
    const double mean = density.mean();
    const double target = mean - theta;
    if (target <= density.grid_min()) {
        throw InfeasibleTargetError("hypothesized mean shift falls below the outcome support");
    }

    const auto f = [&](double xi) {
        const double t0 = density.truncated_moment(0, xi, TruncSide::Below);
        const double t1 = density.truncated_moment(1, xi, TruncSide::Below);
        const double t2 = density.truncated_moment(2, xi, TruncSide::Below);
        const double denom = xi * t0 - t1;  // E[(xi - Y)1{Y <= xi}] > 0 above grid_min
        return (xi * t1 - t2) / denom - target;
    };

    // f < 0 at the target itself; grow the right end until f turns positive
    const double lo = target;
    double hi = std::max(density.grid_max(), target + 1.0);
    for (int it = 0; f(hi) <= 0.0; ++it) {
        if (it >= 200) throw InfeasibleTargetError("ratio equation has no root on the search range");
        hi = target + 2.0 * (hi - target);
    }

    SensitivityValueSolution sol;
    sol.theta = theta;
    sol.xi = bisect_to_residual(f, lo, hi);
    sol.t0 = density.truncated_moment(0, sol.xi, TruncSide::Below);
    sol.t1 = density.truncated_moment(1, sol.xi, TruncSide::Below);
    sol.t2 = density.truncated_moment(2, sol.xi, TruncSide::Below);
    sol.cond_mean = mean;
    sol.lambda_x = 1.0 / (sol.xi * sol.t0 - sol.t1);
    sol.eh2 =
        sol.lambda_x * sol.lambda_x * (sol.xi * sol.xi * sol.t0 - 2.0 * sol.xi * sol.t1 + sol.t2);
    return sol;
}

double eif_phi1(const L2Solution& sol, int z, double y, double e) {
    const double zz = static_cast<double>(z);
    const double h = sol.h_star(y);
    return zz / e * (2.0 * sol.pi(y) + h * h - sol.eh2) + sol.eh2;
}

double eif_phi2(const L2Solution& sol, int z, double y, double e) {
    const double zz = static_cast<double>(z);
    const double h = sol.h_star(y);
    return zz / e * (sol.pi(y) * sol.t1 + h * y - sol.ehy) + sol.ehy;
}

double eif_phi0(const SensitivityValueSolution& sol, int z, double y, double e) {
    const double zz = static_cast<double>(z);
    const double h = sol.h_star(y);
    return zz / e * (-2.0 * sol.lambda_x * (y - sol.cond_mean) + sol.eh2 - h * h) + sol.eh2;
}

std::vector<L2CurvePoint> estimate_l2_curve(const ObservationalDataset& data, const FoldPlan& folds,
                                            const std::vector<double>& lambda_grid, OutcomeSign sign,
                                            const AnalysisConfig& config,
                                            const NuisanceFactory* factory) {
    if (lambda_grid.empty()) throw ConfigError("lambda grid is empty");
    for (double l : lambda_grid) {
        if (!(l >= 0.0)) throw ConfigError("lambda grid values must be non-negative");
    }
    if (sign == OutcomeSign::Maximize) {
        auto curve = estimate_l2_curve(negate_outcome(data), folds, lambda_grid,
                                       OutcomeSign::Minimize, config, factory);
        for (auto& point : curve) {
            point.psi2.value = -point.psi2.value;
            point.psi2.per_unit_eif = -point.psi2.per_unit_eif;
        }
        return curve;
    }

    const NuisanceFactory fac = factory ? *factory : default_nuisance_factory(config);
    const int G = static_cast<int>(lambda_grid.size());

    CrossFitEvaluator evaluator;
    evaluator.columns = 2 * G;
    evaluator.eval = [&lambda_grid, G](const ConditionalDensity& density, double e,
                                       const Eigen::RowVectorXd&, int z, double y,
                                       Eigen::Ref<Eigen::RowVectorXd> out) {
        const double zz = static_cast<double>(z);
        std::optional<double> warm;
        for (int g = 0; g < G; ++g) {
            const double lambda = lambda_grid[g];
            if (lambda == 0.0) {
                // unit ratio: psi1 contribution is identically 1, psi2 is the
                // uncorrected outcome-mean influence value
                out[g] = 1.0;
                out[G + g] = zz / e * (y - density.mean()) + density.mean();
                continue;
            }
            const L2Solution sol = solve_lagrangian(density, lambda, warm);
            warm = sol.xi;
            out[g] = eif_phi1(sol, z, y, e);
            out[G + g] = eif_phi2(sol, z, y, e);
        }
    };

    const Eigen::MatrixXd eif = cross_fit(data, folds, fac, evaluator);
    std::vector<L2CurvePoint> curve(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
        auto& point = curve[static_cast<std::size_t>(g)];
        point.lambda = lambda_grid[g];
        point.psi1 = pool_cross_fitted(eif.col(g), folds);
        point.psi2 = pool_cross_fitted(eif.col(G + g), folds);
    }
    return curve;
}

PsiEstimate estimate_psi0(const ObservationalDataset& data, const FoldPlan& folds, double theta,
                          const AnalysisConfig& config, const NuisanceFactory* factory) {
    if (theta <= 0.0) {
        PsiEstimate est;
        est.value = 1.0;
        est.se = 0.0;
        est.per_unit_eif = Eigen::VectorXd::Ones(data.n());
        est.n = data.n();
        return est;
    }
    const NuisanceFactory fac = factory ? *factory : default_nuisance_factory(config);
    CrossFitEvaluator evaluator;
    evaluator.columns = 1;
    evaluator.eval = [theta](const ConditionalDensity& density, double e, const Eigen::RowVectorXd&,
                             int z, double y, Eigen::Ref<Eigen::RowVectorXd> out) {
        const SensitivityValueSolution sol = solve_sensitivity_value(density, theta);
        out[0] = eif_phi0(sol, z, y, e);
    };
    const Eigen::MatrixXd eif = cross_fit(data, folds, fac, evaluator);
    return pool_cross_fitted(eif.col(0), folds);
}

}  // namespace msens
