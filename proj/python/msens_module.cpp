// Python bindings for the sensitivity-analysis core. Datasets cross the
// boundary as numpy arrays; results come back as dicts of arrays so the
// python side stays dependency-light.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msens/bands.hpp"
#include "msens/dataset.hpp"
#include "msens/errors.hpp"
#include "msens/export.hpp"
#include "msens/l2.hpp"
#include "msens/linf.hpp"
#include "msens/simulation.hpp"

namespace py = pybind11;
using namespace msens;

namespace {

ObservationalDataset dataset_from_arrays(const py::array_t<double>& covariates,
                                         const py::array_t<long>& treatment,
                                         const py::array_t<double>& outcome,
                                         std::vector<std::string> names) {
    const auto x = covariates.unchecked<2>();
    const auto z = treatment.unchecked<1>();
    const auto y = outcome.unchecked<1>();
    const int n = static_cast<int>(z.shape(0));
    const int d = static_cast<int>(x.shape(1));
    if (x.shape(0) != n || y.shape(0) != n) throw ValidationError("array lengths disagree");

    ObservationalDataset data;
    data.covariates.resize(n, d);
    data.treatment.resize(n);
    data.outcome.resize(n);
    for (int i = 0; i < n; ++i) {
        data.treatment[i] = static_cast<int>(z(i));
        data.outcome[i] = y(i);
        for (int j = 0; j < d; ++j) data.covariates(i, j) = x(i, j);
    }
    if (names.empty()) {
        for (int j = 0; j < d; ++j) names.push_back("x" + std::to_string(j));
    }
    data.column_names = std::move(names);
    data.validate();
    return data;
}

py::dict estimate_to_dict(const std::vector<double>& grid,
                          const std::vector<const PsiEstimate*>& ests, double alpha) {
    py::dict out;
    const std::size_t G = grid.size();
    py::array_t<double> param(G), value(G), se(G), ci_lo(G), ci_hi(G);
    auto p = param.mutable_unchecked<1>();
    auto v = value.mutable_unchecked<1>();
    auto s = se.mutable_unchecked<1>();
    auto lo = ci_lo.mutable_unchecked<1>();
    auto hi = ci_hi.mutable_unchecked<1>();
    for (std::size_t g = 0; g < G; ++g) {
        p(g) = grid[g];
        v(g) = ests[g]->value;
        s(g) = ests[g]->se;
        lo(g) = ests[g]->ci_lo(alpha);
        hi(g) = ests[g]->ci_hi(alpha);
    }
    out["param"] = param;
    out["estimate"] = value;
    out["se"] = se;
    out["ci_lo"] = ci_lo;
    out["ci_hi"] = ci_hi;
    return out;
}

AnalysisConfig make_config(int folds, double alpha, int reps, std::uint64_t seed) {
    AnalysisConfig config;
    config.K = folds;
    config.alpha = alpha;
    config.bootstrap_reps = reps;
    config.seed = seed;
    return config;
}

}  // namespace

PYBIND11_MODULE(_msens, m) {
    m.doc() = "sensitivity analysis for causal inference from observational data";

    py::register_exception<msens::Error>(m, "MsensError");

    m.def("load_csv",
          [](const std::string& path, const std::string& tcol, const std::string& ycol) {
              const auto data = load_csv(path, tcol, ycol);
              py::dict out;
              py::array_t<double> x({data.n(), data.d()});
              py::array_t<long> z(data.n());
              py::array_t<double> y(data.n());
              auto xm = x.mutable_unchecked<2>();
              auto zm = z.mutable_unchecked<1>();
              auto ym = y.mutable_unchecked<1>();
              for (int i = 0; i < data.n(); ++i) {
                  zm(i) = data.treatment[i];
                  ym(i) = data.outcome[i];
                  for (int j = 0; j < data.d(); ++j) xm(i, j) = data.covariates(i, j);
              }
              out["covariates"] = x;
              out["treatment"] = z;
              out["outcome"] = y;
              out["columns"] = data.column_names;
              return out;
          },
          py::arg("path"), py::arg("treatment_col") = "z", py::arg("outcome_col") = "y");

    m.def("make_folds",
          [](int n, int K, std::uint64_t seed) { return make_folds(n, K, seed).assignments; },
          py::arg("n"), py::arg("K"), py::arg("seed") = 1);

    m.def("weight_bounds",
          [](double e, double gamma) {
              const auto w = weight_bounds(e, gamma);
              return std::make_pair(w.lo, w.hi);
          },
          py::arg("e"), py::arg("gamma"));

    m.def("linf_curve",
          [](const py::array_t<double>& covariates, const py::array_t<long>& treatment,
             const py::array_t<double>& outcome, const std::vector<double>& gammas,
             const std::string& side, int folds, double alpha, std::uint64_t seed) {
              const auto data = dataset_from_arrays(covariates, treatment, outcome, {});
              const auto plan = make_folds(data.n(), folds, seed);
              const auto config = make_config(folds, alpha, 2500, seed);
              const auto curve = estimate_psi(data, plan, gammas,
                                              side == "lower" ? BoundSide::Lower : BoundSide::Upper,
                                              config);
              std::vector<const PsiEstimate*> ests;
              for (const auto& e : curve.estimates) ests.push_back(&e);
              return estimate_to_dict(gammas, ests, alpha);
          },
          py::arg("covariates"), py::arg("treatment"), py::arg("outcome"), py::arg("gammas"),
          py::arg("side") = "upper", py::arg("folds") = 10, py::arg("alpha") = 0.05,
          py::arg("seed") = 1);

    m.def("l2_curve",
          [](const py::array_t<double>& covariates, const py::array_t<long>& treatment,
             const py::array_t<double>& outcome, const std::vector<double>& lambdas,
             const std::string& sign, int folds, double alpha, std::uint64_t seed) {
              const auto data = dataset_from_arrays(covariates, treatment, outcome, {});
              const auto plan = make_folds(data.n(), folds, seed);
              const auto config = make_config(folds, alpha, 2500, seed);
              const auto curve = estimate_l2_curve(
                  data, plan, lambdas,
                  sign == "maximize" ? OutcomeSign::Maximize : OutcomeSign::Minimize, config);
              std::vector<const PsiEstimate*> e1, e2;
              for (const auto& point : curve) {
                  e1.push_back(&point.psi1);
                  e2.push_back(&point.psi2);
              }
              py::dict out;
              out["psi1"] = estimate_to_dict(lambdas, e1, alpha);
              out["psi2"] = estimate_to_dict(lambdas, e2, alpha);
              return out;
          },
          py::arg("covariates"), py::arg("treatment"), py::arg("outcome"), py::arg("lambdas"),
          py::arg("sign") = "minimize", py::arg("folds") = 10, py::arg("alpha") = 0.05,
          py::arg("seed") = 1);

    m.def("ate_l2_curve",
          [](const py::array_t<double>& covariates, const py::array_t<long>& treatment,
             const py::array_t<double>& outcome, const std::vector<double>& lambdas, int folds,
             double alpha, std::uint64_t seed) {
              const auto data = dataset_from_arrays(covariates, treatment, outcome, {});
              const auto plan = make_folds(data.n(), folds, seed);
              const auto config = make_config(folds, alpha, 2500, seed);
              const auto curve = estimate_ate_l2(data, plan, lambdas, config);
              std::vector<const PsiEstimate*> lo, hi, s1;
              for (const auto& point : curve) {
                  lo.push_back(&point.lower);
                  hi.push_back(&point.upper);
                  s1.push_back(&point.avg_sensitivity);
              }
              py::dict out;
              out["lower"] = estimate_to_dict(lambdas, lo, alpha);
              out["upper"] = estimate_to_dict(lambdas, hi, alpha);
              out["avg_sensitivity"] = estimate_to_dict(lambdas, s1, alpha);
              return out;
          },
          py::arg("covariates"), py::arg("treatment"), py::arg("outcome"), py::arg("lambdas"),
          py::arg("folds") = 10, py::arg("alpha") = 0.05, py::arg("seed") = 1);

    m.def("psi0",
          [](const py::array_t<double>& covariates, const py::array_t<long>& treatment,
             const py::array_t<double>& outcome, double theta, int folds, double alpha,
             std::uint64_t seed) {
              const auto data = dataset_from_arrays(covariates, treatment, outcome, {});
              const auto plan = make_folds(data.n(), folds, seed);
              const auto config = make_config(folds, alpha, 2500, seed);
              const auto est = estimate_psi0(data, plan, theta, config);
              py::dict out;
              out["estimate"] = est.value;
              out["se"] = est.se;
              out["ci_lo"] = est.ci_lo(alpha);
              out["ci_hi"] = est.ci_hi(alpha);
              return out;
          },
          py::arg("covariates"), py::arg("treatment"), py::arg("outcome"), py::arg("theta"),
          py::arg("folds") = 10, py::arg("alpha") = 0.05, py::arg("seed") = 1);

    m.def("multiplier_bootstrap",
          [](const py::array_t<double>& eif, const std::vector<double>& estimates,
             const std::vector<double>& ses, double alpha, int reps, std::uint64_t seed) {
              const auto a = eif.unchecked<2>();
              Eigen::MatrixXd m(a.shape(0), a.shape(1));
              for (py::ssize_t i = 0; i < a.shape(0); ++i) {
                  for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a(i, j);
              }
              return multiplier_bootstrap(m, estimates, ses, alpha, reps, seed);
          },
          py::arg("eif"), py::arg("estimates"), py::arg("ses"), py::arg("alpha") = 0.05,
          py::arg("reps") = 2500, py::arg("seed") = 1);

    m.def("interpret_bound", &interpret_bound, py::arg("psi1"), py::arg("alpha") = 0.05);

    m.def("generate_dgp",
          [](int n, std::uint64_t seed, bool misspecify) {
              const auto sample = generate_dgp(n, seed, misspecify);
              py::dict out;
              py::array_t<double> x(n), y(n), y1(n), y0(n);
              py::array_t<long> z(n);
              auto xm = x.mutable_unchecked<1>();
              auto ym = y.mutable_unchecked<1>();
              auto y1m = y1.mutable_unchecked<1>();
              auto y0m = y0.mutable_unchecked<1>();
              auto zm = z.mutable_unchecked<1>();
              for (int i = 0; i < n; ++i) {
                  xm(i) = sample.dataset.covariates(i, 0);
                  ym(i) = sample.dataset.outcome[i];
                  y1m(i) = sample.y1[i];
                  y0m(i) = sample.y0[i];
                  zm(i) = sample.dataset.treatment[i];
              }
              out["x"] = x;
              out["z"] = z;
              out["y"] = y;
              out["y1"] = y1;
              out["y0"] = y0;
              return out;
          },
          py::arg("n"), py::arg("seed") = 1, py::arg("misspecify") = false);

    m.def("oracle_population_values",
          [](const std::vector<double>& gammas, const std::vector<double>& lambdas,
             std::uint64_t seed, const std::string& convention, bool misspecify, long draws) {
              const auto pop = oracle_population_values(
                  gammas, lambdas, seed,
                  convention == "stddev" ? NormalConvention::StdDev : NormalConvention::Variance,
                  misspecify, draws);
              py::dict out;
              out["gamma"] = pop.gamma_grid;
              out["psi_gamma"] = pop.psi_gamma;
              out["lambda"] = pop.lambda_grid;
              out["psi1"] = pop.psi1;
              out["psi2"] = pop.psi2;
              return out;
          },
          py::arg("gammas"), py::arg("lambdas"), py::arg("seed") = 1,
          py::arg("convention") = "variance", py::arg("misspecify") = false,
          py::arg("draws") = 1000000);
}
