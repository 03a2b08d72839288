#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msens/dataset.hpp"
#include "msens/errors.hpp"
#include "msens/l2.hpp"
#include "msens/rng.hpp"
#include "msens/simulation.hpp"

using namespace msens;

namespace {

ConditionalDensity uniform_density(int points = 8193) {
    std::vector<double> grid = linspace(0.0, 1.0, points);
    std::vector<double> pdf(grid.size(), 1.0);
    return ConditionalDensity(std::move(grid), std::move(pdf));
}

// X-independent outcome law: Z ~ Bern(1/2), Y ~ U[0,1] on both arms
ObservationalDataset uniform_synthetic(int n, std::uint64_t seed) {
    Rng rng(seed);
    ObservationalDataset data;
    data.covariates.resize(n, 1);
    data.treatment.resize(n);
    data.outcome.resize(n);
    data.column_names = {"x"};
    for (int i = 0; i < n; ++i) {
        data.covariates(i, 0) = rng.uniform();
        data.treatment[i] = rng.bernoulli(0.5);
        data.outcome[i] = rng.uniform();
    }
    return data;
}

}  // namespace

TEST_CASE("lagrangian roots on uniform outcomes: xi^2/2 = 1/lambda") {
    const auto dens = uniform_density();
    CHECK(root_lagrangian(dens, 2.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(root_lagrangian(dens, 8.0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK_THROWS_AS(root_lagrangian(dens, 0.0), DomainError);
    CHECK_THROWS_AS(root_lagrangian(dens, -1.0), DomainError);
}

TEST_CASE("root residual brackets zero and the deficit is monotone there") {
    const auto dens = uniform_density();
    for (double lambda : {0.5, 1.0, 2.0, 5.0, 13.0}) {
        const double xi = root_lagrangian(dens, lambda);
        const double f = dens.deficit(xi) - 1.0 / lambda;
        CHECK(std::abs(f) < 1e-8);
        CHECK(dens.deficit(xi - 1e-4) - 1.0 / lambda < 0.0);
        CHECK(dens.deficit(xi + 1e-4) - 1.0 / lambda > 0.0);
    }
}

TEST_CASE("warm-started roots match cold roots along a lambda grid") {
    const auto dens = uniform_density();
    std::optional<double> warm;
    for (double lambda : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double cold = root_lagrangian(dens, lambda);
        const double hot = root_lagrangian(dens, lambda, warm);
        CHECK(hot == doctest::Approx(cold).epsilon(1e-9));
        warm = hot;
    }
}

TEST_CASE("sensitivity-value solution on uniform outcomes") {
    const auto dens = uniform_density();
    const auto sol = solve_sensitivity_value(dens, 0.25);
    // ratio(xi) = xi/3 -> xi = 0.75, lambda = 1/(xi^2/2) = 32/9
    CHECK(sol.xi == doctest::Approx(0.75).epsilon(1e-6 / 0.75));
    CHECK(sol.lambda_x == doctest::Approx(32.0 / 9.0).epsilon(1e-6));
    // identity: second moment of the ratio = lambda (xi - (mean - theta))
    CHECK(sol.eh2 == doctest::Approx(sol.lambda_x * (sol.xi - (0.5 - 0.25))).epsilon(1e-6));
    CHECK(sol.eh2 == doctest::Approx(16.0 / 9.0).epsilon(1e-5));

    CHECK_THROWS_AS(solve_sensitivity_value(dens, 0.0), DomainError);
    CHECK_THROWS_AS(solve_sensitivity_value(dens, 0.51), InfeasibleTargetError);
}

TEST_CASE("solution feasibility and the two psi1 quadrature routes") {
    const auto dens = uniform_density();
    for (double lambda : {1.0, 2.0, 8.0}) {
        const auto sol = solve_lagrangian(dens, lambda);
        // E[h*] = 1 under the fitted law
        const double mass = dens.expectation([&](double y) { return sol.h_star(y); });
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        // h* >= 0 pointwise
        for (double y : {0.0, 0.3, 0.9, 1.0}) CHECK(sol.h_star(y) >= 0.0);
        // route A: lambda^2 E[(xi - y)^2 1], route B: duality lambda (xi - E[h* y])
        const double route_a = sol.eh2;
        const double route_b = lambda * (sol.xi - sol.ehy);
        CHECK(route_a == doctest::Approx(route_b).epsilon(1e-6));
        // Pi has conditional mean zero
        const double pi_mean = dens.expectation([&](double y) { return sol.pi(y); });
        CHECK(pi_mean == doctest::Approx(0.0).epsilon(1e-6));
    }
    // frozen analytic values at lambda = 8: xi = 1/2, E[h*^2] = 8/3, E[h*Y] = 1/6
    const auto sol = solve_lagrangian(dens, 8.0);
    CHECK(sol.eh2 == doctest::Approx(8.0 / 3.0).epsilon(1e-6));
    CHECK(sol.ehy == doctest::Approx(1.0 / 6.0).epsilon(1e-5));
}

TEST_CASE("eif z = 0 branches return the conditional functionals") {
    const auto dens = uniform_density();
    const auto sol = solve_lagrangian(dens, 2.0);
    CHECK(eif_phi1(sol, 0, 0.4, 0.3) == doctest::Approx(sol.eh2).epsilon(1e-12));
    CHECK(eif_phi2(sol, 0, 0.4, 0.3) == doctest::Approx(sol.ehy).epsilon(1e-12));
    const auto sv = solve_sensitivity_value(dens, 0.2);
    CHECK(eif_phi0(sv, 0, 0.4, 0.3) == doctest::Approx(sv.eh2).epsilon(1e-12));
}

TEST_CASE("small-lambda limit: phi1 -> 1 and phi2 -> augmented IPW") {
    const auto dens = uniform_density();
    const double lambda = 1e-7;
    const auto sol = solve_lagrangian(dens, lambda);
    const double e = 0.45, y = 0.3;
    CHECK(eif_phi1(sol, 1, y, e) == doctest::Approx(1.0).epsilon(1e-3));
    const double aipw = (1.0 / e) * (y - dens.mean()) + dens.mean();
    CHECK(eif_phi2(sol, 1, y, e) == doctest::Approx(aipw).epsilon(1e-3));
}

TEST_CASE("uncentered eifs integrate to their targets on a toy law") {
    const std::vector<double> p_x = {0.45, 0.55};
    const std::vector<double> e_x = {0.6, 0.25};

    std::vector<ConditionalDensity> laws;
    for (int c = 0; c < 2; ++c) {
        std::vector<double> grid = linspace(0.0, 1.0, 4001);
        std::vector<double> pdf(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double y = grid[g];
            pdf[g] = c == 0 ? 0.5 + y : 1.3 - 0.6 * y;
        }
        laws.emplace_back(std::move(grid), std::move(pdf));
    }

    const double lambda = 2.0;
    double psi1 = 0.0, psi2 = 0.0, e_phi1 = 0.0, e_phi2 = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto sol = solve_lagrangian(laws[c], lambda);
        psi1 += p_x[c] * sol.eh2;
        psi2 += p_x[c] * sol.ehy;
        const double t1 = laws[c].expectation([&](double y) { return eif_phi1(sol, 1, y, e_x[c]); });
        const double t2 = laws[c].expectation([&](double y) { return eif_phi2(sol, 1, y, e_x[c]); });
        e_phi1 += p_x[c] * (e_x[c] * t1 + (1.0 - e_x[c]) * eif_phi1(sol, 0, 0.0, e_x[c]));
        e_phi2 += p_x[c] * (e_x[c] * t2 + (1.0 - e_x[c]) * eif_phi2(sol, 0, 0.0, e_x[c]));
    }
    CHECK(e_phi1 == doctest::Approx(psi1).epsilon(1e-6));
    CHECK(e_phi2 == doctest::Approx(psi2).epsilon(1e-6));
}

TEST_CASE("lambda = 0 point: psi1 is exactly one with zero spread") {
    const auto data = uniform_synthetic(200, 11);
    const auto folds = make_folds(200, 4, 5);
    AnalysisConfig config;
    config.K = 4;
    const auto curve =
        estimate_l2_curve(data, folds, {0.0, 1.0}, OutcomeSign::Minimize, config);
    CHECK(curve[0].psi1.value == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(curve[0].psi1.se == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(curve[0].psi2.se > 0.0);
}

TEST_CASE("curves are monotone within uncertainty and flip is an involution") {
    const auto sample = generate_dgp(240, 17, false);
    const auto folds = make_folds(240, 6, 2);
    AnalysisConfig config;
    config.K = 6;
    const std::vector<double> lambdas = {0.5, 1.0, 2.0, 4.0};

    const auto lo = estimate_l2_curve(sample.dataset, folds, lambdas, OutcomeSign::Minimize, config);
    for (std::size_t g = 1; g < lambdas.size(); ++g) {
        const double tol1 = 2.0 * (lo[g].psi1.se + lo[g - 1].psi1.se);
        const double tol2 = 2.0 * (lo[g].psi2.se + lo[g - 1].psi2.se);
        CHECK(lo[g].psi1.value >= lo[g - 1].psi1.value - tol1);
        CHECK(lo[g].psi2.value <= lo[g - 1].psi2.value + tol2);
        CHECK(lo[g].psi1.value >= 1.0 - 2.0 * lo[g].psi1.se);
    }

    // double negation of the outcome restores minimize-mode bits
    const auto twice = estimate_l2_curve(negate_outcome(negate_outcome(sample.dataset)), folds,
                                         lambdas, OutcomeSign::Minimize, config);
    for (std::size_t g = 0; g < lambdas.size(); ++g) {
        CHECK(twice[g].psi1.value == lo[g].psi1.value);
        CHECK(twice[g].psi2.value == lo[g].psi2.value);
    }

    // maximize bounds sit above minimize bounds; each trades off its own
    // second moment, so only psi2 is comparable across signs
    const auto hi = estimate_l2_curve(sample.dataset, folds, lambdas, OutcomeSign::Maximize, config);
    for (std::size_t g = 0; g < lambdas.size(); ++g) {
        CHECK(hi[g].psi2.value >= lo[g].psi2.value);
        CHECK(hi[g].psi1.value >= 1.0 - 2.0 * hi[g].psi1.se);
    }
}

TEST_CASE("psi0: theta <= 0 degenerates, positive theta matches the analytic value") {
    const auto data = uniform_synthetic(5000, 23);
    const auto folds = make_folds(5000, 4, 29);
    AnalysisConfig config;
    config.K = 4;

    const auto trivial = estimate_psi0(data, folds, -0.5, config);
    CHECK(trivial.value == 1.0);
    CHECK(trivial.se == 0.0);

    // Y | X uniform independent of X, e = 1/2: population value 16/9
    const auto est = estimate_psi0(data, folds, 0.25, config);
    CHECK(std::abs(est.value - 16.0 / 9.0) < 3.0 * est.se);

    // increasing theta tightens the constraint
    const auto est2 = estimate_psi0(data, folds, 0.35, config);
    CHECK(est2.value >= est.value - 2.0 * (est.se + est2.se));
}
