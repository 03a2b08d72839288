#include "msens/nuisance.hpp"

#include <cmath>

#include "msens/errors.hpp"
#include "msens/stats.hpp"

namespace msens {

double PropensityModel::linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() + 1 != coefficients.size()) {
        throw DomainError("propensity query has wrong dimension");
    }
    double eta = coefficients[0];
    for (int j = 0; j < x.size(); ++j) eta += coefficients[j + 1] * x[j];
    return eta;
}

double PropensityModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return clamp(logistic(linear_predictor(x)), clamp_lo, clamp_hi);
}

PropensityModel fit_propensity(const Eigen::MatrixXd& covariates, const Eigen::VectorXi& labels,
                               const IrlsOptions& options) {
    const int n = static_cast<int>(labels.size());
    const int d = static_cast<int>(covariates.cols());
    if (covariates.rows() != n) throw FitError("propensity design and labels differ in length");
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw FitError("labels must be 0/1");
        ones += labels[i];
    }
    if (ones == 0 || ones == n) throw FitError("training data must contain both classes");

    Eigen::MatrixXd design(n, d + 1);
    design.col(0).setOnes();
    if (d > 0) design.rightCols(d) = covariates;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
    for (int iter = 0; iter < options.max_iter; ++iter) {
        const Eigen::VectorXd eta = design * beta;
        if (eta.cwiseAbs().maxCoeff() > options.separation_eta) {
            throw FitError(
                "propensity fit diverged (perfect separation suspected); "
                "drop or regularize the separating covariate");
        }
        Eigen::VectorXd p(n), w(n), z(n);
        for (int i = 0; i < n; ++i) {
            p[i] = logistic(eta[i]);
            w[i] = std::max(p[i] * (1.0 - p[i]), 1e-10);
            z[i] = eta[i] + (labels[i] - p[i]) / w[i];
        }
        const Eigen::MatrixXd xtw = design.transpose() * w.asDiagonal();
        const Eigen::MatrixXd hessian = xtw * design;
        const Eigen::LDLT<Eigen::MatrixXd> solver(hessian);
        if (solver.info() != Eigen::Success || !solver.isPositive()) {
            throw FitError("singular weighted design in propensity fit");
        }
        const Eigen::VectorXd beta_new = solver.solve(xtw * z);
        if (!beta_new.allFinite()) throw FitError("propensity fit produced non-finite coefficients");
        const double delta = (beta_new - beta).cwiseAbs().maxCoeff();
        beta = beta_new;
        if (delta < options.tol) break;
    }

    PropensityModel model;
    model.coefficients = beta;
    model.clamp_lo = options.clamp_lo;
    model.clamp_hi = options.clamp_hi;
    return model;
}

namespace {

constexpr long kKernelTableLimit = 1 << 22;  // entries; ~32 MB of doubles

double column_sd(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    if (n < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / (n - 1));
}

}  // namespace

KernelConditionalModel::KernelConditionalModel(Eigen::MatrixXd train_x, Eigen::VectorXd train_y,
                                               Eigen::VectorXd bandwidth_x, double bandwidth_y,
                                               int grid_points)
    : train_x_(std::move(train_x)),
      train_y_(std::move(train_y)),
      bandwidth_x_(std::move(bandwidth_x)),
      bandwidth_y_(bandwidth_y) {
    const int n = static_cast<int>(train_y_.size());
    if (n < 1) throw FitError("conditional model needs at least one training point");
    if (train_x_.rows() != n) throw FitError("conditional model design/outcome length mismatch");
    if (bandwidth_x_.size() != train_x_.cols()) {
        throw FitError("bandwidth_x length must match covariate dimension");
    }
    if (!(bandwidth_y_ > 0.0)) throw FitError("bandwidth_y must be positive");
    if (grid_points < 16) throw FitError("grid_points must be at least 16");
    rebuild_grid(grid_points);
}

void KernelConditionalModel::rebuild_grid(int grid_points) {
    const int n = static_cast<int>(train_y_.size());
    const double lo = train_y_.minCoeff() - 3.0 * bandwidth_y_;
    const double hi = train_y_.maxCoeff() + 3.0 * bandwidth_y_;
    base_grid_ = linspace(lo, hi, grid_points);

    if (static_cast<long>(n) * grid_points <= kKernelTableLimit) {
        k2_.resize(n, grid_points);
        const double inv_h = 1.0 / bandwidth_y_;
        for (int i = 0; i < n; ++i) {
            for (int g = 0; g < grid_points; ++g) {
                const double z = (base_grid_[static_cast<std::size_t>(g)] - train_y_[i]) * inv_h;
                k2_(i, g) = std::exp(-0.5 * z * z);
            }
        }
    } else {
        k2_.resize(0, 0);
    }
}

KernelConditionalModel KernelConditionalModel::fit(const Eigen::MatrixXd& train_x,
                                                   const Eigen::VectorXd& train_y, double scale_x,
                                                   double scale_y, int grid_points,
                                                   bool mean_shift) {
    const int n = static_cast<int>(train_y.size());
    if (n < 2) throw FitError("bandwidth rule needs at least 2 training points");
    const double rate = std::pow(static_cast<double>(n), -1.0 / 6.0);
    Eigen::VectorXd hx(train_x.cols());
    for (int j = 0; j < train_x.cols(); ++j) {
        const double sd = column_sd(train_x.col(j));
        hx[j] = sd > 0.0 ? scale_x * sd * rate : 1e-12;
    }

    Eigen::VectorXd y = train_y;
    std::optional<Eigen::VectorXd> beta;
    if (mean_shift) {
        beta = fit_linear_mean(train_x, train_y);
        for (int i = 0; i < n; ++i) {
            double mu = (*beta)[0];
            for (int j = 0; j < train_x.cols(); ++j) mu += (*beta)[j + 1] * train_x(i, j);
            y[i] -= mu;
        }
    }
    double sdy = column_sd(y);
    if (!(sdy > 0.0)) sdy = 1e-3 * std::max(1.0, std::abs(y.mean()));
    KernelConditionalModel model(train_x, y, hx, scale_y * sdy * rate, grid_points);
    model.mean_shift_ = std::move(beta);
    return model;
}

void KernelConditionalModel::set_mean_shift(Eigen::VectorXd beta) {
    if (beta.size() != train_x_.cols() + 1) throw FitError("mean shift beta has wrong dimension");
    if (mean_shift_) throw FitError("mean shift already set");
    for (int i = 0; i < train_y_.size(); ++i) {
        double mu = beta[0];
        for (int j = 0; j < train_x_.cols(); ++j) mu += beta[j + 1] * train_x_(i, j);
        train_y_[i] -= mu;
    }
    mean_shift_ = std::move(beta);
    rebuild_grid(static_cast<int>(base_grid_.size()));
}

Eigen::VectorXd KernelConditionalModel::weights_at(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() != train_x_.cols()) throw DomainError("conditional query has wrong dimension");
    const int n = static_cast<int>(train_y_.size());
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        double q = 0.0;
        for (int j = 0; j < x.size(); ++j) {
            const double z = (x[j] - train_x_(i, j)) / bandwidth_x_[j];
            q += z * z;
        }
        w[i] = std::exp(-0.5 * q);
    }
    const double total = w.sum();
    if (!(total > 0.0)) {
        throw ExtrapolationError("query lies outside the support of the conditional model");
    }
    return w / total;
}

ConditionalDensity KernelConditionalModel::density_at(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    const Eigen::VectorXd w = weights_at(x);
    const int grid_points = static_cast<int>(base_grid_.size());
    std::vector<double> raw(static_cast<std::size_t>(grid_points), 0.0);
    const double inv_h = 1.0 / bandwidth_y_;
    const double norm = inv_h / std::sqrt(2.0 * M_PI);
    if (k2_.size() > 0) {
        const Eigen::RowVectorXd row = w.transpose() * k2_;
        for (int g = 0; g < grid_points; ++g) raw[static_cast<std::size_t>(g)] = row[g] * norm;
    } else {
        const int n = static_cast<int>(train_y_.size());
        for (int i = 0; i < n; ++i) {
            if (w[i] <= 0.0) continue;
            for (int g = 0; g < grid_points; ++g) {
                const double z = (base_grid_[static_cast<std::size_t>(g)] - train_y_[i]) * inv_h;
                raw[static_cast<std::size_t>(g)] += w[i] * std::exp(-0.5 * z * z) * norm;
            }
        }
    }
    std::vector<double> grid = base_grid_;
    if (mean_shift_) {
        double mu = (*mean_shift_)[0];
        for (int j = 0; j < x.size(); ++j) mu += (*mean_shift_)[j + 1] * x[j];
        for (double& y : grid) y += mu;
    }
    return ConditionalDensity(std::move(grid), std::move(raw));
}

double KernelConditionalModel::cond_expect(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                           const std::function<double(double)>& g) const {
    return density_at(x).expectation(g);
}

double KernelConditionalModel::cond_quantile(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                             double alpha) const {
    return density_at(x).quantile(alpha);
}

double KernelConditionalModel::truncated_moment(const Eigen::Ref<const Eigen::RowVectorXd>& x, int k,
                                                double cutoff, TruncSide side) const {
    return density_at(x).truncated_moment(k, cutoff, side);
}

Eigen::VectorXd fit_linear_mean(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(y.size());
    Eigen::MatrixXd design(n, x.cols() + 1);
    design.col(0).setOnes();
    if (x.cols() > 0) design.rightCols(x.cols()) = x;
    return (design.transpose() * design)
        .ldlt()
        .solve(design.transpose() * y);
}

}  // namespace msens
