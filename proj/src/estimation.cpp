#include "msens/estimation.hpp"

#include <cmath>

#include "msens/errors.hpp"
#include "msens/stats.hpp"
#include "msens/threading.hpp"

namespace msens {

double PsiEstimate::ci_lo(double alpha) const { return value - norm_quantile(1.0 - alpha / 2) * se; }
double PsiEstimate::ci_hi(double alpha) const { return value + norm_quantile(1.0 - alpha / 2) * se; }

PsiEstimate pool_cross_fitted(const Eigen::VectorXd& per_unit, const FoldPlan& folds) {
    const int n = static_cast<int>(per_unit.size());
    if (n != folds.n()) throw ConfigError("per-unit vector does not match fold plan");
    PsiEstimate est;
    est.per_unit_eif = per_unit;
    est.n = n;
    est.value = per_unit.mean();

    double pooled = 0.0;
    const auto folds_idx = folds.fold_indices();
    for (const auto& idx : folds_idx) {
        if (idx.empty()) throw ConfigError("empty fold in plan");
        double fold_mean = 0.0;
        for (int i : idx) fold_mean += per_unit[i];
        fold_mean /= static_cast<double>(idx.size());
        double ss = 0.0;
        for (int i : idx) ss += (per_unit[i] - fold_mean) * (per_unit[i] - fold_mean);
        pooled += ss / static_cast<double>(idx.size());
    }
    pooled /= static_cast<double>(folds.K);
    est.se = std::sqrt(pooled / static_cast<double>(n));
    return est;
}

NuisanceFactory default_nuisance_factory(const AnalysisConfig& config) {
    const double scale_x = config.bandwidth_scale_x;
    const double scale_y = config.bandwidth_scale_y;
    const int grid_points = config.grid_points;
    const double clamp_lo = config.propensity_clamp_lo;
    const double clamp_hi = config.propensity_clamp_hi;
    const bool mean_shift = config.mean_shift;
    return [=](const ObservationalDataset& data, const std::vector<int>& train_rows) {
        const int m = static_cast<int>(train_rows.size());
        Eigen::MatrixXd x(m, data.d());
        Eigen::VectorXi z(m);
        int treated = 0;
        for (int r = 0; r < m; ++r) {
            x.row(r) = data.covariates.row(train_rows[r]);
            z[r] = data.treatment[train_rows[r]];
            treated += z[r];
        }
        if (treated < 2 || treated > m - 1) {
            throw FitError("a training fold lacks enough of both treatment classes; use fewer folds");
        }
        Eigen::MatrixXd x1(treated, data.d());
        Eigen::VectorXd y1(treated);
        int k = 0;
        for (int r = 0; r < m; ++r) {
            if (z[r] == 1) {
                x1.row(k) = x.row(r);
                y1[k] = data.outcome[train_rows[r]];
                ++k;
            }
        }
        IrlsOptions irls;
        irls.clamp_lo = clamp_lo;
        irls.clamp_hi = clamp_hi;
        const PropensityModel propensity = fit_propensity(x, z, irls);
        auto outcome = std::make_shared<KernelConditionalModel>(
            KernelConditionalModel::fit(x1, y1, scale_x, scale_y, grid_points, mean_shift));
        NuisanceFit fit;
        fit.propensity = [propensity](const Eigen::RowVectorXd& q) { return propensity.predict(q); };
        fit.outcome = std::move(outcome);
        return fit;
    };
}

Eigen::MatrixXd cross_fit(const ObservationalDataset& data, const FoldPlan& folds,
                          const NuisanceFactory& factory, const CrossFitEvaluator& evaluator) {
    if (folds.n() != data.n()) throw ConfigError("fold plan does not match dataset size");
    Eigen::MatrixXd out(data.n(), evaluator.columns);
    const auto fold_idx = folds.fold_indices();
    parallel_for(folds.K, [&](int f) {
        const NuisanceFit fit = factory(data, folds.train_indices(f + 1));
        Eigen::RowVectorXd row(evaluator.columns);
        for (int i : fold_idx[static_cast<std::size_t>(f)]) {
            const Eigen::RowVectorXd x = data.covariates.row(i);
            const ConditionalDensity density = fit.outcome->density_at(x);
            const double e = fit.propensity(x);
            evaluator.eval(density, e, x, data.treatment[i], data.outcome[i], row);
            out.row(i) = row;
        }
    });
    return out;
}

}  // namespace msens
