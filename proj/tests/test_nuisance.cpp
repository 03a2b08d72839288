#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msens/density.hpp"
#include "msens/errors.hpp"
#include "msens/nuisance.hpp"
#include "msens/rng.hpp"
#include "msens/stats.hpp"

using namespace msens;

namespace {

// uniform density on [0,1] materialized on a grid
ConditionalDensity uniform_density(int points = 2001) {
    std::vector<double> grid = linspace(0.0, 1.0, points);
    std::vector<double> pdf(grid.size(), 1.0);
    return ConditionalDensity(std::move(grid), std::move(pdf));
}

}  // namespace

TEST_CASE("intercept-only logistic fit recovers the class rate") {
    Eigen::MatrixXd x(100, 0);
    Eigen::VectorXi z(100);
    for (int i = 0; i < 100; ++i) z[i] = i < 30 ? 1 : 0;
    const auto model = fit_propensity(x, z);
    Eigen::RowVectorXd empty(0);
    CHECK(model.predict(empty) == doctest::Approx(0.30).epsilon(1e-9));
}

TEST_CASE("logistic MLE is consistent on a logit-linear design") {
    const int n = 100000;
    Rng rng(2024);
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXi z(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 3.0 * rng.uniform() - 1.0;
        const double e = logistic(2.0 * x(i, 0) - 1.0);
        z[i] = rng.bernoulli(e);
    }
    const auto model = fit_propensity(x, z);
    CHECK(model.coefficients[0] == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(model.coefficients[1] == doctest::Approx(2.0).epsilon(0.025));  // +-0.05 absolute
}

TEST_CASE("perfect separation raises a fit error") {
    Eigen::MatrixXd x(20, 1);
    Eigen::VectorXi z(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
        z[i] = i < 10 ? 0 : 1;
    }
    CHECK_THROWS_AS(fit_propensity(x, z), FitError);
}

TEST_CASE("propensity prediction: link, clamp, dimension") {
    PropensityModel model;
    model.coefficients = Eigen::VectorXd::Zero(2);
    Eigen::RowVectorXd q(1);
    q << 3.0;
    CHECK(model.predict(q) == doctest::Approx(0.5));

    model.coefficients << -1.0, 2.0;
    q << 0.5;
    CHECK(model.predict(q) == doctest::Approx(0.5));

    // raw 0.001 clamps up to 0.01
    model.coefficients << std::log(0.001 / 0.999), 0.0;
    CHECK(model.predict(q) == doctest::Approx(0.01));

    Eigen::RowVectorXd wrong(2);
    wrong << 1.0, 2.0;
    CHECK_THROWS_AS(model.predict(wrong), DomainError);
}

TEST_CASE("density normalization, cdf monotone, quantile consistency") {
    const auto dens = uniform_density();
    CHECK(dens.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dens.expectation([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-9));

    double prev = -1.0;
    for (double y : {0.0, 0.2, 0.5, 0.7, 1.0}) {
        const double c = dens.cdf(y);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(dens.cdf(dens.grid_max()) == doctest::Approx(1.0).epsilon(1e-9));

    for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.999}) {
        const double q = dens.quantile(alpha);
        CHECK(dens.cdf(q) >= alpha);
        CHECK(q <= dens.grid_max());
        // previous grid point sits strictly below alpha
        const auto& grid = dens.grid();
        const auto it = std::lower_bound(grid.begin(), grid.end(), q);
        if (it != grid.begin()) CHECK(dens.cdf(*(it - 1)) < alpha);
    }
}

TEST_CASE("truncated moments against uniform analytic values") {
    const auto dens = uniform_density();
    CHECK(dens.truncated_moment(0, 2.0, TruncSide::Below) == doctest::Approx(1.0).epsilon(1e-9));
    // int_0^{0.75} y dy = 0.28125
    CHECK(dens.truncated_moment(1, 0.75, TruncSide::Below) ==
          doctest::Approx(0.28125).epsilon(1e-6));
    // partition of unity at several cutoffs and orders
    for (int k : {0, 1, 2}) {
        const double full = dens.truncated_moment(k, 2.0, TruncSide::Below);
        for (double cut : {0.1, 0.33, 0.66, 0.9}) {
            const double below = dens.truncated_moment(k, cut, TruncSide::Below);
            const double above = dens.truncated_moment(k, cut, TruncSide::Above);
            CHECK(below + above == doctest::Approx(full).epsilon(1e-9));
        }
    }
    // monotone in the cutoff for k = 0 and k = 1 on non-negative support
    double prev0 = -1.0, prev1 = -1.0;
    for (double cut = 0.0; cut <= 1.0; cut += 0.05) {
        const double t0 = dens.truncated_moment(0, cut, TruncSide::Below);
        const double t1 = dens.truncated_moment(1, cut, TruncSide::Below);
        CHECK(t0 >= prev0);
        CHECK(t1 >= prev1);
        prev0 = t0;
        prev1 = t1;
    }
}

TEST_CASE("one-point kernel model is centered at its training point") {
    Eigen::MatrixXd x(1, 1);
    x << 0.4;
    Eigen::VectorXd y(1);
    y << 2.5;
    Eigen::VectorXd hx(1);
    hx << 0.3;
    const KernelConditionalModel model(x, y, hx, 0.2, 512);
    Eigen::RowVectorXd q(1);
    q << 0.4;
    CHECK(model.cond_expect(q, [](double v) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(model.cond_expect(q, [](double v) { return v; }) ==
          doctest::Approx(2.5).epsilon(0.01 * 0.2 / 2.5));
    CHECK(model.cond_quantile(q, 0.5) == doctest::Approx(2.5).epsilon(0.01));
}

TEST_CASE("kernel conditional mean and quantiles on uniform outcomes") {
    // X independent of Y, Y ~ U[0,1]
    const int n = 100000;
    Rng rng(99);
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform();
        y[i] = rng.uniform();
    }
    const auto model = KernelConditionalModel::fit(x, y);
    Eigen::RowVectorXd q(1);
    q << 0.5;
    CHECK(model.cond_expect(q, [](double v) { return v; }) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(model.cond_quantile(q, 0.75) == doctest::Approx(0.75).epsilon(0.02 / 0.75));
    CHECK(model.cond_quantile(q, 0.999) <= model.density_at(q).grid_max());
    CHECK(model.truncated_moment(q, 1, 0.75, TruncSide::Below) ==
          doctest::Approx(0.28125).epsilon(0.01 / 0.28125));
}

TEST_CASE("far-off-support query raises extrapolation error") {
    Eigen::MatrixXd x(5, 1);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) {
        x(i, 0) = 0.1 * i;
        y[i] = i;
    }
    Eigen::VectorXd hx(1);
    hx << 0.05;
    const KernelConditionalModel model(x, y, hx, 0.5, 64);
    Eigen::RowVectorXd q(1);
    q << 100.0;
    CHECK_THROWS_AS(model.density_at(q), ExtrapolationError);
}

TEST_CASE("two-step mean shift keeps densities normalized and tracks the mean") {
    const int n = 4000;
    Rng rng(5);
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 2.0 * rng.uniform() - 1.0;
        y[i] = 3.0 * x(i, 0) + 0.1 * rng.normal();
    }
    auto model = KernelConditionalModel::fit(x, y);
    auto shifted = KernelConditionalModel::fit(x, y);
    shifted.set_mean_shift(fit_linear_mean(x, y));

    Eigen::RowVectorXd q(1);
    q << 0.8;
    CHECK(shifted.cond_expect(q, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-6));
    // the residualized model centers the conditional law correctly even at
    // the edge of the support, where raw smoothing drags the mean inward
    const double target = 3.0 * 0.8;
    const double shifted_err = std::abs(shifted.cond_expect(q, [](double v) { return v; }) - target);
    const double raw_err = std::abs(model.cond_expect(q, [](double v) { return v; }) - target);
    CHECK(shifted_err < raw_err);
    CHECK(shifted_err < 0.05);
}
