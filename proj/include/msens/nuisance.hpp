#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>

#include "msens/density.hpp"

namespace msens {

// Logistic regression (intercept + slopes) fit by IRLS. Predictions are
// clamped into [clamp_lo, clamp_hi] to keep inverse-propensity weights
// bounded under the overlap assumption.
struct PropensityModel {
    Eigen::VectorXd coefficients;  // length d + 1
    double clamp_lo = 0.01;
    double clamp_hi = 0.99;

    double linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

struct IrlsOptions {
    double tol = 1e-8;
    int max_iter = 100;
    double clamp_lo = 0.01;
    double clamp_hi = 0.99;
    // |linear predictor| beyond this at a training point marks the fit as
    // separated; the MLE is diverging.
    double separation_eta = 30.0;
};

PropensityModel fit_propensity(const Eigen::MatrixXd& covariates, const Eigen::VectorXi& labels,
                               const IrlsOptions& options = {});

// Abstract conditional outcome law p(y | x). Implementations are immutable
// and safe to query concurrently.
class ConditionalModel {
  public:
    virtual ~ConditionalModel() = default;
    virtual ConditionalDensity density_at(const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
};

// Nadaraya-Watson kernel estimate of p(y | x) from treated-side training
// pairs: product Gaussian kernel over covariate dimensions, Gaussian kernel
// in y, evaluated on a fixed grid spanning the training outcomes.
// An optional linear mean shift recenters training outcomes at the query
// (two-step residual modelling); it translates the grid by mu(x).
class KernelConditionalModel : public ConditionalModel {
  public:
    KernelConditionalModel(Eigen::MatrixXd train_x, Eigen::VectorXd train_y,
                           Eigen::VectorXd bandwidth_x, double bandwidth_y, int grid_points = 512);

    // Rule-of-thumb bandwidths: scale * sd * n^(-1/6) per dimension. With
    // mean_shift the model is fitted to residuals of a linear outcome mean
    // (bandwidth_y from the residual spread) and evaluation grids translate
    // by the fitted mean at the query.
    static KernelConditionalModel fit(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                                      double scale_x = 1.0, double scale_y = 1.0,
                                      int grid_points = 512, bool mean_shift = false);

    ConditionalDensity density_at(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;

    double cond_expect(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                       const std::function<double(double)>& g) const;
    double cond_quantile(const Eigen::Ref<const Eigen::RowVectorXd>& x, double alpha) const;
    double truncated_moment(const Eigen::Ref<const Eigen::RowVectorXd>& x, int k, double cutoff,
                            TruncSide side) const;

    // beta has length d + 1 (intercept first); enables the two-step shift.
    void set_mean_shift(Eigen::VectorXd beta);

    double bandwidth_y() const { return bandwidth_y_; }
    const Eigen::VectorXd& bandwidth_x() const { return bandwidth_x_; }

  private:
    Eigen::VectorXd weights_at(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    void rebuild_grid(int grid_points);

    Eigen::MatrixXd train_x_;
    Eigen::VectorXd train_y_;  // residualized when mean shift is set
    Eigen::VectorXd bandwidth_x_;
    double bandwidth_y_;
    std::vector<double> base_grid_;  // spans training outcomes (or residuals)
    Eigen::MatrixXd k2_;             // train x grid kernel table; empty if too large
    std::optional<Eigen::VectorXd> mean_shift_;
};

// OLS of y on [1, x]; used for the optional two-step recentering.
Eigen::VectorXd fit_linear_mean(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace msens
