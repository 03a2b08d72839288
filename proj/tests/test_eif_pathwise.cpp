#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pathwise_toy.hpp"

using namespace msens;
using namespace pathwise;

TEST_CASE("pathwise derivative: quantile-balancing bound, both directions") {
    const ToyLaw law = make_toy();
    const double gamma = 2.5;
    for (const BoundSide side : {BoundSide::Upper, BoundSide::Lower}) {
        std::vector<LInfSolution> rows;
        for (std::size_t c = 0; c < 3; ++c) {
            const OracleDist dist(law, c);
            ConditionalDensity dens(law.grid, law.density[c][1]);
            rows.push_back(quantile_balancing(dens, dist.e(), gamma, side));
        }
        run_pathwise_check(
            [&](const ToyLaw& l) { return oracle_psi_linf(l, gamma, side); },
            [&](std::size_t c, int z, double y) { return eif_phi(rows[c], z, y); }, law, 20,
            side == BoundSide::Upper ? 101 : 102, [](double dev) { CHECK(dev < 1e-3); });
    }
}

TEST_CASE("pathwise derivative: trade-off curve values psi1 and psi2") {
    const ToyLaw law = make_toy();
    const double lambda = 2.2;
    std::vector<L2Solution> rows;
    std::vector<double> es;
    for (std::size_t c = 0; c < 3; ++c) {
        const OracleDist dist(law, c);
        ConditionalDensity dens(law.grid, law.density[c][1]);
        rows.push_back(solve_lagrangian(dens, lambda));
        es.push_back(dist.e());
    }
    run_pathwise_check([&](const ToyLaw& l) { return oracle_psi1(l, lambda); },
                       [&](std::size_t c, int z, double y) { return eif_phi1(rows[c], z, y, es[c]); },
                       law, 20, 103, [](double dev) { CHECK(dev < 1e-3); });
    run_pathwise_check([&](const ToyLaw& l) { return oracle_psi2(l, lambda); },
                       [&](std::size_t c, int z, double y) { return eif_phi2(rows[c], z, y, es[c]); },
                       law, 20, 104, [](double dev) { CHECK(dev < 1e-3); });
}

TEST_CASE("pathwise derivative: average sensitivity value at fixed theta") {
    const ToyLaw law = make_toy();
    const double theta = 0.12;
    std::vector<SensitivityValueSolution> rows;
    std::vector<double> es;
    for (std::size_t c = 0; c < 3; ++c) {
        const OracleDist dist(law, c);
        ConditionalDensity dens(law.grid, law.density[c][1]);
        rows.push_back(solve_sensitivity_value(dens, theta));
        es.push_back(dist.e());
    }
    run_pathwise_check([&](const ToyLaw& l) { return oracle_psi0(l, theta); },
                       [&](std::size_t c, int z, double y) { return eif_phi0(rows[c], z, y, es[c]); },
                       law, 20, 105, [](double dev) { CHECK(dev < 1e-3); });
}
