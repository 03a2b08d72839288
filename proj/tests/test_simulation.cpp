#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "msens/export.hpp"
#include "msens/simulation.hpp"
#include "msens/stats.hpp"

using namespace msens;

TEST_CASE("benchmark draws satisfy the construction row by row") {
    const auto sample = generate_dgp(5000, 42, false);
    for (int i = 0; i < 5000; ++i) {
        CHECK(sample.y1[i] - sample.y0[i] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(sample.dataset.covariates(i, 0)) <= 1.0);
        const double y = sample.dataset.treatment[i] == 1 ? sample.y1[i] : sample.y0[i];
        CHECK(sample.dataset.outcome[i] == y);
    }
    const auto again = generate_dgp(5000, 42, false);
    CHECK(again.dataset.outcome == sample.dataset.outcome);
}

TEST_CASE("treated share matches the quadrature of the propensity") {
    const int n = 100000;
    const auto sample = generate_dgp(n, 7, false);
    const double freq = static_cast<double>(sample.dataset.treatment.sum()) / n;

    // quadrature of e(x) against the truncated-normal density
    DgpTruth truth{false, NormalConvention::Variance};
    const double sx = truth.sigma_x();
    const double mass = norm_cdf(1.0 / sx) - norm_cdf(-1.0 / sx);
    const int grid_n = 20001;
    double acc = 0.0;
    for (int g = 0; g < grid_n; ++g) {
        const double x = -1.0 + 2.0 * g / (grid_n - 1);
        const double w = (g == 0 || g == grid_n - 1) ? 0.5 : 1.0;
        acc += w * truth.propensity(x) * norm_pdf(x / sx) / (sx * mass);
    }
    acc *= 2.0 / (grid_n - 1);
    CHECK(freq == doctest::Approx(acc).epsilon(0.01 / acc));
}

TEST_CASE("misspecified generator bends both equations") {
    DgpTruth plain{false, NormalConvention::Variance};
    DgpTruth bent{true, NormalConvention::Variance};
    CHECK(bent.outcome_mean(0.8) == doctest::Approx(plain.outcome_mean(0.8) - 0.64));
    CHECK(bent.propensity(0.8) < plain.propensity(0.8));
    CHECK(bent.propensity(0.0) == doctest::Approx(plain.propensity(0.0)));
}

TEST_CASE("oracle: psi1 at lambda zero is exactly one") {
    const auto pop = oracle_population_values({2.0}, {0.0}, 3, NormalConvention::Variance, false,
                                              20000);
    CHECK(pop.psi1[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pop.psi2[0] == doctest::Approx(0.5).epsilon(0.02));  // E[Y(1)] = 1/2
}

TEST_CASE("oracle is deterministic in the seed and stable in draw count") {
    const auto a = oracle_population_values({4.0}, {2.0}, 5, NormalConvention::Variance, false,
                                            200000);
    const auto b = oracle_population_values({4.0}, {2.0}, 5, NormalConvention::Variance, false,
                                            200000);
    CHECK(a.psi_gamma[0] == b.psi_gamma[0]);
    CHECK(a.psi1[0] == b.psi1[0]);
    const auto c = oracle_population_values({4.0}, {2.0}, 6, NormalConvention::Variance, false,
                                            400000);
    CHECK(a.psi1[0] == doctest::Approx(c.psi1[0]).epsilon(0.01));
}

TEST_CASE("study reports are deterministic given the config") {
    StudyConfig cfg;
    cfg.sample_sizes = {120};
    cfg.reps = 6;
    cfg.K = 4;
    cfg.seed = 1234;
    cfg.misspecify = true;
    cfg.gamma_values = {3.0};
    cfg.lambda_values = {1.0};
    cfg.oracle_draws = 50000;
    const auto a = run_rmse_study(cfg);
    const auto b = run_rmse_study(cfg);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].value == b.cells[i].value);
        CHECK(a.cells[i].metric == "rmse");
    }
    // cells: one-step + direct for psi_gamma, psi1, psi2
    CHECK(a.cells.size() == 6);
}

TEST_CASE("coverage study emits sane probabilities") {
    StudyConfig cfg;
    cfg.sample_sizes = {120};
    cfg.reps = 8;
    cfg.K = 4;
    cfg.seed = 99;
    cfg.misspecify = false;
    cfg.gamma_values = {3.0};
    cfg.lambda_values = {1.0};
    cfg.oracle_draws = 50000;
    const auto report = run_coverage_study(cfg);
    CHECK(report.cells.size() == 3);
    for (const auto& cell : report.cells) {
        CHECK(cell.value >= 0.0);
        CHECK(cell.value <= 1.0);
        CHECK(cell.metric == "coverage");
    }
}

TEST_CASE("study report round-trips through csv") {
    StudyConfig cfg;
    cfg.sample_sizes = {120};
    cfg.reps = 4;
    cfg.K = 4;
    cfg.seed = 5;
    cfg.gamma_values = {2.0};
    cfg.lambda_values = {1.0};
    cfg.oracle_draws = 20000;
    const auto report = run_rmse_study(cfg);
    write_study_csv("/tmp/msens_study.csv", report);
    write_study_json("/tmp/msens_study.json", report);

    std::ifstream in("/tmp/msens_study.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "metric,estimator,nuisance_config,n,family,param,value");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(report.cells.size()));
}
