#include "msens/bands.hpp"

#include <algorithm>
#include <cmath>

#include "msens/errors.hpp"
#include "msens/rng.hpp"
#include "msens/stats.hpp"
#include "msens/threading.hpp"

namespace msens {

double multiplier_bootstrap(const Eigen::MatrixXd& per_unit_eif,
                            const std::vector<double>& estimates, const std::vector<double>& ses,
                            double alpha, int reps, std::uint64_t seed) {
    const int n = static_cast<int>(per_unit_eif.rows());
    const int G = static_cast<int>(per_unit_eif.cols());
    if (G < 1 || static_cast<int>(estimates.size()) != G || static_cast<int>(ses.size()) != G) {
        throw ConfigError("bootstrap inputs must share the grid length");
    }
    if (n < 2) throw ConfigError("bootstrap needs at least 2 units");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (reps < 100) throw ConfigError("bootstrap reps must be at least 100");

    // centered and standardized: (phi_ig - psi_g) / sigma_g with sigma = se * sqrt(n)
    Eigen::MatrixXd standardized(n, G);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    for (int g = 0; g < G; ++g) {
        if (!(ses[static_cast<std::size_t>(g)] > 0.0)) {
            throw DegenerateGridError("zero standard error at a grid point; band is undefined");
        }
        const double sigma = ses[static_cast<std::size_t>(g)] * sqrt_n;
        standardized.col(g) =
            (per_unit_eif.col(g).array() - estimates[static_cast<std::size_t>(g)]) / sigma;
    }

    std::vector<double> sups(static_cast<std::size_t>(reps));
    parallel_for(reps, [&](int r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) a[i] = static_cast<double>(rng.rademacher());
        const Eigen::RowVectorXd means = a.transpose() * standardized;  // sums, scaled below
        sups[static_cast<std::size_t>(r)] = means.cwiseAbs().maxCoeff() / sqrt_n;
    });

    std::sort(sups.begin(), sups.end());
    const double target = (1.0 - alpha) * static_cast<double>(reps);
    int rank = static_cast<int>(std::ceil(target));
    if (rank < 1) rank = 1;
    if (rank > reps) rank = reps;
    return sups[static_cast<std::size_t>(rank - 1)];
}

BandResult build_band(const std::vector<double>& grid, const std::vector<PsiEstimate>& estimates,
                      double alpha, int reps, std::uint64_t seed) {
    const int G = static_cast<int>(grid.size());
    if (G < 1 || static_cast<int>(estimates.size()) != G) {
        throw ConfigError("grid and estimates must align");
    }
    const int n = estimates.front().n;
    Eigen::MatrixXd eif(n, G);
    std::vector<double> values(grid.size()), ses(grid.size());
    for (int g = 0; g < G; ++g) {
        const auto& est = estimates[static_cast<std::size_t>(g)];
        if (est.n != n) throw ConfigError("estimates disagree on sample size");
        eif.col(g) = est.per_unit_eif;
        values[static_cast<std::size_t>(g)] = est.value;
        ses[static_cast<std::size_t>(g)] = est.se;
    }
    const double qhat = multiplier_bootstrap(eif, values, ses, alpha, reps, seed);

    BandResult band;
    band.grid = grid;
    band.critical_value = qhat;
    band.alpha = alpha;
    band.reps = reps;
    band.seed = seed;
    band.points.resize(grid.size());
    for (int g = 0; g < G; ++g) {
        auto& p = band.points[static_cast<std::size_t>(g)];
        const auto& est = estimates[static_cast<std::size_t>(g)];
        p.param = grid[static_cast<std::size_t>(g)];
        p.estimate = est.value;
        p.se = est.se;
        p.ci_lo = est.ci_lo(alpha);
        p.ci_hi = est.ci_hi(alpha);
        p.band_lo = est.value - qhat * est.se;
        p.band_hi = est.value + qhat * est.se;
    }
    return band;
}

PairBand bonferroni_pair_band(const BandResult& band1, const BandResult& band2) {
    if (band1.grid != band2.grid) throw ConfigError("pair band requires matching grids");
    if (band1.alpha != band2.alpha) throw ConfigError("pair band requires matching levels");
    PairBand pair;
    pair.psi1 = band1;
    pair.psi2 = band2;
    pair.joint_level = 1.0 - 2.0 * band1.alpha;
    return pair;
}

PsiEstimate combine_sum(const PsiEstimate& a, const PsiEstimate& b, const FoldPlan& folds) {
    if (a.n != b.n) throw ConfigError("combining estimates from different samples");
    return pool_cross_fitted(a.per_unit_eif + b.per_unit_eif, folds);
}

PsiEstimate combine_weighted(double wa, const PsiEstimate& a, double wb, const PsiEstimate& b,
                             const FoldPlan& folds) {
    if (a.n != b.n) throw ConfigError("combining estimates from different samples");
    return pool_cross_fitted(wa * a.per_unit_eif + wb * b.per_unit_eif, folds);
}

std::vector<AteL2Point> estimate_ate_l2(const ObservationalDataset& data, const FoldPlan& folds,
                                        const std::vector<double>& lambda_grid,
                                        const AnalysisConfig& config,
                                        const NuisanceFactory* factory) {
    const ObservationalDataset control = flip_treatment_negate_outcome(data);
    const auto treated_lo = estimate_l2_curve(data, folds, lambda_grid, OutcomeSign::Minimize,
                                              config, factory);
    const auto treated_hi = estimate_l2_curve(data, folds, lambda_grid, OutcomeSign::Maximize,
                                              config, factory);
    // Bounds computed on the transformed sample target -E[Y(0)], so the
    // minimize curve there is, after negation, the control upper bound.
    const auto control_lo = estimate_l2_curve(control, folds, lambda_grid, OutcomeSign::Minimize,
                                              config, factory);
    const auto control_hi = estimate_l2_curve(control, folds, lambda_grid, OutcomeSign::Maximize,
                                              config, factory);

    const double p_treated = static_cast<double>(data.treated_count()) / data.n();
    std::vector<AteL2Point> out(lambda_grid.size());
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
        out[g].lambda = lambda_grid[g];
        // ATE lower = lower bound on E[Y(1)] minus upper bound on E[Y(0)]
        //           = psi2_min(sample) + psi2_min(transformed sample)
        out[g].lower = combine_sum(treated_lo[g].psi2, control_lo[g].psi2, folds);
        out[g].upper = combine_sum(treated_hi[g].psi2, control_hi[g].psi2, folds);
        out[g].avg_sensitivity =
            combine_weighted(p_treated, treated_lo[g].psi1, 1.0 - p_treated, control_lo[g].psi1,
                             folds);
    }
    return out;
}

std::vector<AteLInfPoint> estimate_ate_linf(const ObservationalDataset& data, const FoldPlan& folds,
                                            const std::vector<double>& gamma_grid,
                                            const AnalysisConfig& config,
                                            const NuisanceFactory* factory) {
    const ObservationalDataset control = flip_treatment_negate_outcome(data);
    const auto treated_lo = estimate_psi(data, folds, gamma_grid, BoundSide::Lower, config, factory);
    const auto treated_hi = estimate_psi(data, folds, gamma_grid, BoundSide::Upper, config, factory);
    const auto control_lo =
        estimate_psi(control, folds, gamma_grid, BoundSide::Lower, config, factory);
    const auto control_hi =
        estimate_psi(control, folds, gamma_grid, BoundSide::Upper, config, factory);

    std::vector<AteLInfPoint> out(gamma_grid.size());
    for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
        out[g].gamma = gamma_grid[g];
        out[g].lower = combine_sum(treated_lo.estimates[g], control_lo.estimates[g], folds);
        out[g].upper = combine_sum(treated_hi.estimates[g], control_hi.estimates[g], folds);
    }
    return out;
}

}  // namespace msens
