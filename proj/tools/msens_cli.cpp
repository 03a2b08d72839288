// msens: sensitivity analysis for observational studies under odds-ratio
// (L-infinity) and second-moment (L2) relaxations of unconfoundedness.
//
// Subcommands:
//   analyze    estimate sensitivity curves (with optional simultaneous bands)
//   calibrate  gauge confounding strength by refitting without covariates
//   simulate   benchmark studies on the built-in data-generating process
//   interpret  high-confidence bound on the propensity ratio from psi1
//
// Exit codes: 0 success, 1 data/runtime error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "msens/bands.hpp"
#include "msens/dataset.hpp"
#include "msens/errors.hpp"
#include "msens/export.hpp"
#include "msens/l2.hpp"
#include "msens/linf.hpp"
#include "msens/nuisance.hpp"
#include "msens/rng.hpp"
#include "msens/simulation.hpp"
#include "msens/stats.hpp"

namespace {

using namespace msens;

struct AnalyzeArgs {
    std::string data_path, treatment_col = "z", outcome_col = "y";
    std::string framework = "l2";
    std::string gamma_spec, lambda_spec;
    std::optional<double> theta;
    int folds = 10;
    double alpha = 0.05;
    bool band = false;
    int reps = 2500;
    std::uint64_t seed = 1;
    std::string out = "msens_curves";
};

CurveExportRow make_row(const std::string& framework, const std::string& quantity, double param,
                        const PsiEstimate& est, double alpha, double critical_value, int K,
                        std::uint64_t seed) {
    CurveExportRow row;
    row.framework = framework;
    row.quantity = quantity;
    row.param = param;
    row.estimate = est.value;
    row.se = est.se;
    row.ci_lo = est.ci_lo(alpha);
    row.ci_hi = est.ci_hi(alpha);
    // with bands off the simultaneous columns fall back to the CI
    const double q = critical_value > 0.0 ? critical_value : norm_quantile(1.0 - alpha / 2.0);
    row.band_lo = est.value - q * est.se;
    row.band_hi = est.value + q * est.se;
    row.critical_value = q;
    row.n = est.n;
    row.K = K;
    row.alpha = alpha;
    row.seed = seed;
    return row;
}

int cmd_analyze(const AnalyzeArgs& args) {
    const auto data = load_csv(args.data_path, args.treatment_col, args.outcome_col);
    const auto folds = make_folds(data.n(), args.folds, args.seed);
    AnalysisConfig config;
    config.K = args.folds;
    config.alpha = args.alpha;
    config.bootstrap_reps = args.reps < 100 ? 100 : args.reps;
    config.seed = args.seed;

    std::vector<CurveExportRow> rows;
    std::vector<CurveExportRow> effect_lower, psi1_rows;

    auto emit_series = [&](const std::string& framework, const std::string& quantity,
                           const std::vector<double>& grid, const std::vector<PsiEstimate>& ests,
                           bool with_band) {
        double q = 0.0;
        if (with_band) {
            const auto band =
                build_band(grid, ests, args.alpha, config.bootstrap_reps,
                           derive_seed(args.seed, std::hash<std::string>{}(quantity)));
            q = band.critical_value;
        }
        std::vector<CurveExportRow> series;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            series.push_back(make_row(framework, quantity, grid[g], ests[g], args.alpha, q,
                                      args.folds, args.seed));
        }
        rows.insert(rows.end(), series.begin(), series.end());
        return series;
    };

    if (args.framework == "linf") {
        if (args.gamma_spec.empty()) throw ConfigError("--gamma-grid is required for linf");
        std::vector<double> gammas = parse_grid(args.gamma_spec);
        for (double& g : gammas) {
            if (g <= 1.0) {
                std::cerr << "warning: gamma " << g << " nudged to 1 + 1e-6 (must exceed 1)\n";
                g = 1.0 + 1e-6;
            }
        }
        const auto upper = estimate_psi(data, folds, gammas, BoundSide::Upper, config);
        const auto lower = estimate_psi(data, folds, gammas, BoundSide::Lower, config);
        emit_series("linf", "upper", gammas, upper.estimates, args.band);
        effect_lower = emit_series("linf", "lower", gammas, lower.estimates, args.band);
    } else if (args.framework == "l2") {
        if (args.lambda_spec.empty()) throw ConfigError("--lambda-grid is required for l2");
        const auto lambdas = parse_grid(args.lambda_spec);
        const auto curve = estimate_l2_curve(data, folds, lambdas, OutcomeSign::Minimize, config);
        std::vector<PsiEstimate> p1, p2;
        for (const auto& point : curve) {
            p1.push_back(point.psi1);
            p2.push_back(point.psi2);
        }
        // psi1 at lambda = 0 is degenerate (se = 0); band it only when safe
        const bool psi1_band = args.band && lambdas.front() > 0.0;
        psi1_rows = emit_series("l2", "psi1", lambdas, p1, psi1_band);
        effect_lower = emit_series("l2", "psi2", lambdas, p2, args.band);
        if (args.theta) {
            // sensitivity value at a fixed hypothesized outcome shift
            const auto psi0 = estimate_psi0(data, folds, *args.theta, config);
            rows.push_back(make_row("l2", "psi0", *args.theta, psi0, args.alpha, 0.0, args.folds,
                                    args.seed));
            std::cout << "sensitivity value at theta = " << *args.theta << ": " << psi0.value
                      << " (se " << psi0.se << ")\n";
        }
    } else if (args.framework == "ate") {
        if (args.lambda_spec.empty()) throw ConfigError("--lambda-grid is required for ate");
        const auto lambdas = parse_grid(args.lambda_spec);
        const auto curve = estimate_ate_l2(data, folds, lambdas, config);
        std::vector<PsiEstimate> lo, hi, s1;
        for (const auto& point : curve) {
            lo.push_back(point.lower);
            hi.push_back(point.upper);
            s1.push_back(point.avg_sensitivity);
        }
        effect_lower = emit_series("ate", "ate_lower", lambdas, lo, args.band);
        emit_series("ate", "ate_upper", lambdas, hi, args.band);
        psi1_rows = emit_series("ate", "avg_sensitivity", lambdas, s1, false);
    } else {
        throw ConfigError("--framework must be linf, l2 or ate");
    }

    write_curve_csv(args.out + ".csv", rows);
    write_curve_json(args.out + ".json", rows);
    std::cout << "wrote " << args.out << ".csv and " << args.out << ".json (" << rows.size()
              << " rows)\n";

    const auto hit = find_explain_away(effect_lower, psi1_rows, args.band);
    const char* param_name = args.framework == "linf" ? "gamma" : "lambda";
    if (hit) {
        std::cout << "explain-away point: " << param_name << " = " << hit->param;
        if (hit->psi1) std::cout << " (average sensitivity value = " << *hit->psi1 << ")";
        std::cout << "\n";
    } else {
        std::cout << "the effect's lower " << (args.band ? "band" : "CI")
                  << " stays above zero on this grid\n";
    }
    return 0;
}

struct CalibrateArgs {
    std::string data_path, treatment_col = "z", outcome_col = "y";
    std::vector<std::string> leave_out;  // comma-joined covariate sets
    std::string out = "msens_calibration";
};

int cmd_calibrate(const CalibrateArgs& args) {
    const auto data = load_csv(args.data_path, args.treatment_col, args.outcome_col);

    const auto fit_on = [&](const std::vector<int>& keep) {
        Eigen::MatrixXd x(data.n(), keep.size());
        for (std::size_t j = 0; j < keep.size(); ++j) x.col(static_cast<int>(j)) = data.covariates.col(keep[j]);
        return fit_propensity(x, data.treatment);
    };
    const auto predict_on = [&](const PropensityModel& model, const std::vector<int>& keep, int i) {
        Eigen::RowVectorXd q(keep.size());
        for (std::size_t j = 0; j < keep.size(); ++j) {
            q[static_cast<int>(j)] = data.covariates(i, keep[j]);
        }
        return model.predict(q);
    };

    std::vector<int> all_cols(data.d());
    for (int j = 0; j < data.d(); ++j) all_cols[static_cast<std::size_t>(j)] = j;
    const auto full = fit_on(all_cols);

    struct CalRow {
        std::string label;
        double max_odds_ratio = 1.0;
        double second_moment = 1.0;
    };
    std::vector<CalRow> table;

    std::vector<std::vector<std::string>> sets = {{}};  // baseline row: empty set
    for (const auto& spec : args.leave_out) {
        std::vector<std::string> names;
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            const auto comma = spec.find(',', pos);
            names.push_back(
                spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        sets.push_back(names);
    }

    for (const auto& names : sets) {
        std::set<int> dropped;
        for (const auto& name : names) {
            bool found = false;
            for (int j = 0; j < data.d(); ++j) {
                if (data.column_names[static_cast<std::size_t>(j)] == name) {
                    dropped.insert(j);
                    found = true;
                }
            }
            if (!found) throw ValidationError("unknown covariate '" + name + "'");
        }
        std::vector<int> keep;
        for (int j = 0; j < data.d(); ++j) {
            if (!dropped.count(j)) keep.push_back(j);
        }
        const auto reduced = fit_on(keep);

        CalRow row;
        for (std::size_t k = 0; k < names.size(); ++k) row.label += (k ? "+" : "") + names[k];
        if (row.label.empty()) row.label = "(none)";

        double max_or = 1.0, sum_h2 = 0.0;
        int treated = 0;
        for (int i = 0; i < data.n(); ++i) {
            const double e_full = predict_on(full, all_cols, i);
            const double e_red = predict_on(reduced, keep, i);
            const double odds = (e_red / (1.0 - e_red)) / (e_full / (1.0 - e_full));
            max_or = std::max(max_or, std::max(odds, 1.0 / odds));
            if (data.treatment[i] == 1) {
                const double h = e_red / e_full;
                sum_h2 += h * h;
                ++treated;
            }
        }
        row.max_odds_ratio = max_or;
        row.second_moment = sum_h2 / treated;
        table.push_back(row);
    }

    std::sort(table.begin(), table.end(),
              [](const CalRow& a, const CalRow& b) { return a.second_moment > b.second_moment; });

    std::ofstream csv(args.out + ".csv");
    if (!csv) throw SchemaError("cannot write " + args.out + ".csv");
    csv << "leave_out,max_odds_ratio,second_moment\n";
    std::printf("%-32s %16s %16s\n", "leave_out", "max_odds_ratio", "second_moment");
    for (const auto& row : table) {
        csv << row.label << ',' << row.max_odds_ratio << ',' << row.second_moment << '\n';
        std::printf("%-32s %16.4f %16.4f\n", row.label.c_str(), row.max_odds_ratio,
                    row.second_moment);
    }
    return 0;
}

struct SimulateArgs {
    std::string preset = "desk";
    int n = 0;  // 0 keeps the preset default
    int reps = 0;
    std::uint64_t seed = 7;
    bool sd_convention = false;
    std::string out = "msens_study";
};

int cmd_simulate(const SimulateArgs& args) {
    StudyConfig cfg;
    cfg.seed = args.seed;
    cfg.convention = args.sd_convention ? NormalConvention::StdDev : NormalConvention::Variance;

    StudyReport report;
    if (args.preset == "table1") {
        cfg.sample_sizes = args.n > 0 ? std::vector<int>{args.n} : std::vector<int>{100, 200, 300};
        cfg.reps = args.reps > 0 ? args.reps : 500;
        cfg.misspecify = true;
        cfg.gamma_values = {4.0};
        cfg.lambda_values = {2.0};
        cfg.nuisance_configs = {"est_est", "true_e", "true_dens", "true_both"};
        report = run_rmse_study(cfg);
    } else if (args.preset == "table2") {
        cfg.sample_sizes = args.n > 0 ? std::vector<int>{args.n} : std::vector<int>{100, 200, 300};
        cfg.reps = args.reps > 0 ? args.reps : 500;
        cfg.misspecify = false;
        cfg.gamma_values = {2.0, 4.0, 6.0};
        cfg.lambda_values = {1.0, 2.0, 3.0};
        report = run_coverage_study(cfg);
    } else if (args.preset == "table3") {
        cfg.sample_sizes = args.n > 0 ? std::vector<int>{args.n} : std::vector<int>{100, 200, 300};
        cfg.reps = args.reps > 0 ? args.reps : 500;
        cfg.misspecify = false;
        report = run_uniform_study(cfg);
    } else if (args.preset == "desk") {
        cfg.sample_sizes = args.n > 0 ? std::vector<int>{args.n} : std::vector<int>{300};
        cfg.reps = args.reps > 0 ? args.reps : 200;
        cfg.misspecify = true;
        cfg.gamma_values = {4.0};
        cfg.lambda_values = {2.0};
        report = run_rmse_study(cfg);
    } else {
        throw ConfigError("--preset must be table1, table2, table3 or desk");
    }

    write_study_csv(args.out + ".csv", report);
    write_study_json(args.out + ".json", report);
    std::cout << "wrote " << args.out << ".csv and " << args.out << ".json ("
              << report.cells.size() << " cells)\n";
    return 0;
}

struct InterpretArgs {
    double psi1 = 1.0;
    double alpha = 0.05;
};

int cmd_interpret(const InterpretArgs& args) {
    const auto bound = interpret_bound(args.psi1, args.alpha);
    std::printf("propensity ratio bound at confidence %.3f: [%.6g, %.6g]\n", 1.0 - args.alpha,
                bound.first, bound.second);
    if (args.psi1 > 1.0) {
        const double shape = 1.0 / (args.psi1 - 1.0);
        std::printf("(gamma fit: shape = rate = %.6g, mean 1, variance %.6g)\n", shape,
                    args.psi1 - 1.0);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sensitivity analysis for observational studies"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "estimate sensitivity curves from a CSV dataset");
    analyze->add_option("--data", analyze_args.data_path, "input CSV with header row")->required();
    analyze->add_option("--treatment-col", analyze_args.treatment_col, "treatment column (0/1)");
    analyze->add_option("--outcome-col", analyze_args.outcome_col, "outcome column");
    analyze->add_option("--framework", analyze_args.framework, "linf | l2 | ate");
    analyze->add_option("--gamma-grid", analyze_args.gamma_spec, "grid: lo:hi:step, list or value");
    analyze->add_option("--lambda-grid", analyze_args.lambda_spec,
                        "grid: lo:hi:step, list or value");
    analyze->add_option("--theta", analyze_args.theta,
                        "also report the sensitivity value at this outcome shift (l2)");
    analyze->add_option("--folds", analyze_args.folds, "cross-fitting folds");
    analyze->add_option("--alpha", analyze_args.alpha, "significance level");
    analyze->add_flag("--band", analyze_args.band, "add multiplier-bootstrap simultaneous bands");
    analyze->add_option("--reps", analyze_args.reps, "bootstrap replicates");
    analyze->add_option("--seed", analyze_args.seed, "random seed");
    analyze->add_option("--out", analyze_args.out, "output path prefix");

    CalibrateArgs calibrate_args;
    auto* calibrate =
        app.add_subcommand("calibrate", "confounding strength via leave-out covariate refits");
    calibrate->add_option("--data", calibrate_args.data_path, "input CSV")->required();
    calibrate->add_option("--treatment-col", calibrate_args.treatment_col, "treatment column");
    calibrate->add_option("--outcome-col", calibrate_args.outcome_col, "outcome column");
    calibrate->add_option("--leave-out", calibrate_args.leave_out,
                          "comma-joined covariate set; repeat the flag for more sets");
    calibrate->add_option("--out", calibrate_args.out, "output path prefix");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "benchmark studies on the built-in generator");
    simulate->add_option("--preset", simulate_args.preset, "table1 | table2 | table3 | desk");
    simulate->add_option("--n", simulate_args.n, "override sample size");
    simulate->add_option("--reps", simulate_args.reps, "override replicate count");
    simulate->add_option("--seed", simulate_args.seed, "random seed");
    simulate->add_flag("--sd-convention", simulate_args.sd_convention,
                       "read generator scale parameters as standard deviations");
    simulate->add_option("--out", simulate_args.out, "output path prefix");

    InterpretArgs interpret_args;
    auto* interpret =
        app.add_subcommand("interpret", "high-confidence propensity-ratio bound from psi1");
    interpret->add_option("--psi1", interpret_args.psi1, "average sensitivity value (>= 1)")
        ->required();
    interpret->add_option("--alpha", interpret_args.alpha, "significance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(analyze_args);
        if (app.got_subcommand(calibrate)) return cmd_calibrate(calibrate_args);
        if (app.got_subcommand(simulate)) return cmd_simulate(simulate_args);
        if (app.got_subcommand(interpret)) return cmd_interpret(interpret_args);
    } catch (const msens::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const msens::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
