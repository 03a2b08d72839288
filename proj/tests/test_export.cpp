#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "msens/errors.hpp"
#include "msens/export.hpp"

using namespace msens;

TEST_CASE("grid spec parsing") {
    const auto a = parse_grid("0:0.7:0.1");
    REQUIRE(a.size() == 8);
    CHECK(a.front() == doctest::Approx(0.0));
    CHECK(a.back() == doctest::Approx(0.7));

    const auto b = parse_grid("1.05:7:0.25");
    CHECK(b.front() == doctest::Approx(1.05));
    CHECK(b.back() <= 7.0 + 1e-12);
    CHECK(b.size() == 24);  // 1.05 + 0.25 k <= 7 -> k <= 23.8

    const auto c = parse_grid("2");
    REQUIRE(c.size() == 1);
    CHECK(c[0] == doctest::Approx(2.0));

    const auto d = parse_grid("1,2,3.5");
    REQUIRE(d.size() == 3);
    CHECK(d[2] == doctest::Approx(3.5));

    CHECK_THROWS_AS(parse_grid("3,2"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1:2"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1:2:0"), ConfigError);
    CHECK_THROWS_AS(parse_grid("abc"), ConfigError);
}

TEST_CASE("explain-away crossing with interpolation") {
    std::vector<CurveExportRow> lower(4), psi1(4);
    const double lambdas[] = {0.1, 0.2, 0.3, 0.4};
    const double lo_band[] = {0.30, 0.10, -0.10, -0.30};
    const double psi1_est[] = {1.1, 1.3, 1.5, 1.7};
    for (int i = 0; i < 4; ++i) {
        lower[i].param = lambdas[i];
        lower[i].band_lo = lo_band[i];
        lower[i].ci_lo = 1.0;  // ensure the band is what is being read
        psi1[i].param = lambdas[i];
        psi1[i].estimate = psi1_est[i];
    }
    const auto hit = find_explain_away(lower, psi1, true);
    REQUIRE(hit.has_value());
    CHECK(hit->param == doctest::Approx(0.25).epsilon(1e-12));
    REQUIRE(hit->psi1.has_value());
    CHECK(*hit->psi1 == doctest::Approx(1.4).epsilon(1e-12));

    // never crosses
    for (auto& r : lower) r.band_lo = 0.5;
    CHECK_FALSE(find_explain_away(lower, psi1, true).has_value());
}

TEST_CASE("gamma interpretation of the average sensitivity value") {
    const auto degenerate = interpret_bound(1.0, 0.05);
    CHECK(degenerate.first == 1.0);
    CHECK(degenerate.second == 1.0);

    // psi1 = 1.5 -> Gamma(2, 2); central 95% interval
    const auto mid = interpret_bound(1.5, 0.05);
    CHECK(mid.first == doctest::Approx(0.1211).epsilon(2e-3));
    CHECK(mid.second == doctest::Approx(2.7858).epsilon(2e-3));
    // the bound P(1/6 < h < 6) > 0.95 implied in the source setting holds
    CHECK(mid.first > 1.0 / 6.0 - 0.05);
    CHECK(mid.second < 6.0);

    // psi1 = 2 -> Exponential(1) quantiles
    const auto wide = interpret_bound(2.0, 0.05);
    CHECK(wide.first == doctest::Approx(-std::log(0.975)).epsilon(1e-6));
    CHECK(wide.second == doctest::Approx(-std::log(0.025)).epsilon(1e-6));

    CHECK_THROWS_AS(interpret_bound(0.9, 0.05), DomainError);
}

TEST_CASE("curve export writes schema superset with header") {
    std::vector<CurveExportRow> rows(1);
    rows[0].framework = "l2";
    rows[0].quantity = "psi1";
    rows[0].param = 0.5;
    rows[0].estimate = 1.25;
    rows[0].se = 0.05;
    rows[0].n = 100;
    rows[0].K = 5;
    rows[0].alpha = 0.05;
    rows[0].seed = 7;
    write_curve_csv("/tmp/msens_curve.csv", rows);
    write_curve_json("/tmp/msens_curve.json", rows);

    std::ifstream in("/tmp/msens_curve.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "framework,param,estimate,se,ci_lo,ci_hi,band_lo,band_hi,critical_value,n,K,alpha,seed,"
          "quantity");
    std::string row;
    std::getline(in, row);
    CHECK(row.find("l2,0.5,1.25") == 0);
}
