#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msens/bands.hpp"
#include "msens/errors.hpp"
#include "msens/rng.hpp"
#include "msens/simulation.hpp"

using namespace msens;

namespace {

// synthetic standardized influence values with correlated columns
Eigen::MatrixXd synthetic_eif(int n, int G, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(n, G);
    for (int i = 0; i < n; ++i) {
        const double shared = rng.normal();
        for (int g = 0; g < G; ++g) {
            const double mix = 0.35 + 0.6 * static_cast<double>(g) / std::max(1, G - 1);
            m(i, g) = shared * std::sqrt(1.0 - mix) + rng.normal() * std::sqrt(mix);
        }
    }
    return m;
}

std::vector<PsiEstimate> as_estimates(const Eigen::MatrixXd& eif, const FoldPlan& folds) {
    std::vector<PsiEstimate> out;
    for (int g = 0; g < eif.cols(); ++g) out.push_back(pool_cross_fitted(eif.col(g), folds));
    return out;
}

}  // namespace

TEST_CASE("singleton grid critical value approximates the normal quantile") {
    const int n = 2000;
    const auto eif = synthetic_eif(n, 1, 77);
    const auto folds = make_folds(n, 4, 3);
    const auto est = as_estimates(eif, folds);
    const double q = multiplier_bootstrap(eif, {est[0].value}, {est[0].se}, 0.05, 2500, 41);
    CHECK(q == doctest::Approx(1.96).epsilon(0.08 / 1.96));
}

TEST_CASE("wider grids dominate the singleton critical value") {
    const int n = 800;
    const auto eif = synthetic_eif(n, 6, 13);
    const auto folds = make_folds(n, 4, 9);
    const auto est = as_estimates(eif, folds);
    std::vector<double> values, ses;
    for (const auto& e : est) {
        values.push_back(e.value);
        ses.push_back(e.se);
    }
    const double q_all = multiplier_bootstrap(eif, values, ses, 0.05, 2500, 5);
    const double q_one =
        multiplier_bootstrap(eif.col(0), {values[0]}, {ses[0]}, 0.05, 2500, 5);
    CHECK(q_all >= q_one - 0.1);
}

TEST_CASE("bootstrap is deterministic and monotone in alpha") {
    const int n = 500;
    const auto eif = synthetic_eif(n, 3, 21);
    const auto folds = make_folds(n, 5, 1);
    const auto est = as_estimates(eif, folds);
    std::vector<double> values, ses;
    for (const auto& e : est) {
        values.push_back(e.value);
        ses.push_back(e.se);
    }
    const double a = multiplier_bootstrap(eif, values, ses, 0.05, 1000, 17);
    const double b = multiplier_bootstrap(eif, values, ses, 0.05, 1000, 17);
    CHECK(a == b);
    const double wide = multiplier_bootstrap(eif, values, ses, 0.10, 1000, 17);
    CHECK(wide <= a);
}

TEST_CASE("degenerate grid raises") {
    Eigen::MatrixXd eif = Eigen::MatrixXd::Zero(50, 1);
    CHECK_THROWS_AS(multiplier_bootstrap(eif, {0.0}, {0.0}, 0.05, 500, 1), DegenerateGridError);
}

TEST_CASE("band contains the estimates and the pointwise CI when q >= z") {
    const int n = 600;
    const auto eif = synthetic_eif(n, 4, 4);
    const auto folds = make_folds(n, 4, 2);
    const auto est = as_estimates(eif, folds);
    const auto band = build_band({1.0, 2.0, 3.0, 4.0}, est, 0.05, 1000, 99);
    CHECK(band.critical_value >= 0.0);
    for (std::size_t g = 0; g < band.points.size(); ++g) {
        const auto& p = band.points[g];
        CHECK(p.band_lo <= p.estimate);
        CHECK(p.estimate <= p.band_hi);
        CHECK(p.band_hi - p.band_lo ==
              doctest::Approx(2.0 * band.critical_value * p.se).epsilon(1e-12));
        if (band.critical_value >= 1.959964) {
            CHECK(p.band_lo <= p.ci_lo);
            CHECK(p.ci_hi <= p.band_hi);
        }
    }

    const auto again = build_band({1.0, 2.0, 3.0, 4.0}, est, 0.05, 1000, 99);
    CHECK(again.critical_value == band.critical_value);
}

TEST_CASE("bonferroni pair band keeps grids aligned") {
    const int n = 400;
    const auto folds = make_folds(n, 4, 6);
    const auto e1 = as_estimates(synthetic_eif(n, 3, 8), folds);
    const auto e2 = as_estimates(synthetic_eif(n, 3, 9), folds);
    const auto b1 = build_band({0.5, 1.0, 1.5}, e1, 0.05, 800, 3);
    const auto b2 = build_band({0.5, 1.0, 1.5}, e2, 0.05, 800, 4);
    const auto pair = bonferroni_pair_band(b1, b2);
    CHECK(pair.joint_level == doctest::Approx(0.90));
    for (std::size_t g = 0; g < 3; ++g) {
        CHECK(pair.psi1.points[g].band_lo <= b1.points[g].estimate);
        CHECK(pair.psi2.points[g].band_lo <= b2.points[g].estimate);
    }
    const auto b3 = build_band({0.5, 1.0}, {e2[0], e2[1]}, 0.05, 800, 4);
    CHECK_THROWS_AS(bonferroni_pair_band(b1, b3), ConfigError);
}

TEST_CASE("ate under the benchmark effect of one half") {
    const auto sample = generate_dgp(400, 51, false);
    const auto folds = make_folds(400, 5, 12);
    AnalysisConfig config;
    config.K = 5;
    const auto curve = estimate_ate_l2(sample.dataset, folds, {0.0, 0.3}, config);

    // at lambda = 0 the bounds collapse to the unconfounded ATE of 0.5
    const auto& base = curve[0];
    CHECK(std::abs(base.lower.value - 0.5) <= 3.0 * base.lower.se);
    CHECK(std::abs(base.upper.value - 0.5) <= 3.0 * base.upper.se);
    CHECK(base.avg_sensitivity.value == doctest::Approx(1.0).epsilon(1e-12));

    // bounds widen with lambda
    const auto& stressed = curve[1];
    CHECK(stressed.lower.value <= base.lower.value + 2.0 * (base.lower.se + stressed.lower.se));
    CHECK(stressed.upper.value >= base.upper.value - 2.0 * (base.upper.se + stressed.upper.se));
    CHECK(stressed.avg_sensitivity.value >= 1.0 - 2.0 * stressed.avg_sensitivity.se);
}

TEST_CASE("ate is near zero under a null effect") {
    // Y(1) = Y(0): take the benchmark sample and remove the offset
    auto sample = generate_dgp(400, 99, false);
    for (int i = 0; i < sample.dataset.n(); ++i) {
        if (sample.dataset.treatment[i] == 1) sample.dataset.outcome[i] -= 0.5;
    }
    const auto folds = make_folds(400, 5, 4);
    AnalysisConfig config;
    config.K = 5;
    const auto curve = estimate_ate_l2(sample.dataset, folds, {0.0}, config);
    CHECK(std::abs(curve[0].lower.value) <= 3.0 * curve[0].lower.se);
}
