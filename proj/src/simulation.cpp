#include "msens/simulation.hpp"

#include <cmath>
#include <map>
#include <memory>

#include "msens/bands.hpp"
#include "msens/density.hpp"
#include "msens/errors.hpp"
#include "msens/l2.hpp"
#include "msens/linf.hpp"
#include "msens/nuisance.hpp"
#include "msens/rng.hpp"
#include "msens/stats.hpp"
#include "msens/threading.hpp"

namespace msens {

double DgpTruth::sigma_x() const {
    return convention == NormalConvention::Variance ? std::sqrt(0.5) : 0.5;
}

double DgpTruth::sigma_u() const {
    return convention == NormalConvention::Variance ? std::sqrt(0.2) : 0.2;
}

double DgpTruth::propensity(double x) const {
    const double logit = 2.0 * x - 1.0 - (misspecify ? x * x : 0.0);
    return logistic(logit);
}

double DgpTruth::outcome_mean(double x) const {
    return 0.5 + x - (misspecify ? x * x : 0.0);
}

double DgpTruth::outcome_sd(double x) const {
    return (x > 0.0 ? 1.0 : 0.5) * sigma_u();
}

DgpSample generate_dgp(int n, std::uint64_t seed, bool misspecify, NormalConvention convention) {
    if (n < 1) throw ConfigError("sample size must be positive");
    DgpTruth truth{misspecify, convention};
    const double sx = truth.sigma_x();
    const double cdf_lo = norm_cdf(-1.0 / sx);
    const double cdf_hi = norm_cdf(1.0 / sx);

    DgpSample sample;
    sample.misspecify = misspecify;
    sample.convention = convention;
    sample.dataset.covariates.resize(n, 1);
    sample.dataset.treatment.resize(n);
    sample.dataset.outcome.resize(n);
    sample.dataset.column_names = {"x"};
    sample.latent_u.resize(n);
    sample.y1.resize(n);
    sample.y0.resize(n);

    Rng rng(derive_seed(seed, 0xD6B));
    for (int i = 0; i < n; ++i) {
        // inverse-CDF draw from the truncated normal
        const double u01 = rng.uniform_pos();
        const double x = sx * norm_quantile(cdf_lo + u01 * (cdf_hi - cdf_lo));
        const double u = truth.sigma_u() * rng.normal();
        const int z = rng.bernoulli(truth.propensity(x));
        const double y1 = truth.outcome_mean(x) + (x > 0.0 ? 1.0 : 0.5) * u;
        const double y0 = y1 - 0.5;
        sample.dataset.covariates(i, 0) = x;
        sample.dataset.treatment[i] = z;
        sample.dataset.outcome[i] = z == 1 ? y1 : y0;
        sample.latent_u[i] = u;
        sample.y1[i] = y1;
        sample.y0[i] = y0;
    }
    return sample;
}

namespace {

// E[(z - U)^+] for standard normal U; strictly increasing in z.
double normal_deficit(double z) { return z * norm_cdf(z) + norm_pdf(z); }

// root of normal_deficit(z) = c for c > 0
double invert_normal_deficit(double c) {
    double lo = -40.0, hi = std::max(c, 0.0) + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (normal_deficit(mid) < c) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * (1.0 + std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

// E[((z - U)^+)^2] for standard normal U
double normal_deficit_sq(double z) {
    return (1.0 + z * z) * norm_cdf(z) + z * norm_pdf(z);
}

// Closed-form conditional law of the benchmark outcome given X = x, Z = 1.
class TrueOutcomeModel : public ConditionalModel {
  public:
    TrueOutcomeModel(DgpTruth truth, int grid_points)
        : truth_(truth), grid_points_(grid_points) {}

    ConditionalDensity density_at(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
        const double m = truth_.outcome_mean(x[0]);
        const double s = truth_.outcome_sd(x[0]);
        std::vector<double> grid = linspace(m - 8.0 * s, m + 8.0 * s, grid_points_);
        std::vector<double> pdf(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double z = (grid[g] - m) / s;
            pdf[g] = norm_pdf(z) / s;
        }
        return ConditionalDensity(std::move(grid), std::move(pdf));
    }

  private:
    DgpTruth truth_;
    int grid_points_;
};

}  // namespace

PopulationValues oracle_population_values(const std::vector<double>& gamma_grid,
                                          const std::vector<double>& lambda_grid,
                                          std::uint64_t seed, NormalConvention convention,
                                          bool misspecify, long draws) {
    if (draws < 1000) throw ConfigError("oracle needs at least 1000 draws");
    DgpTruth truth{misspecify, convention};
    const double sx = truth.sigma_x();
    const double cdf_lo = norm_cdf(-1.0 / sx);
    const double cdf_hi = norm_cdf(1.0 / sx);
    const double su = truth.sigma_u();
    const double s_neg = 0.5 * su, s_pos = su;

    // per-gamma constants
    const std::size_t n_gamma = gamma_grid.size();
    std::vector<double> z_alpha(n_gamma), phi_alpha(n_gamma);
    for (std::size_t g = 0; g < n_gamma; ++g) {
        if (!(gamma_grid[g] > 1.0)) throw DomainError("oracle gamma values must exceed 1");
        const double alpha_star = gamma_grid[g] / (1.0 + gamma_grid[g]);
        z_alpha[g] = norm_quantile(alpha_star);
        phi_alpha[g] = norm_pdf(z_alpha[g]);
    }
    // per-(lambda, side-of-zero) roots of the deficit equation
    const std::size_t n_lambda = lambda_grid.size();
    std::vector<double> zstar_neg(n_lambda), zstar_pos(n_lambda);
    for (std::size_t l = 0; l < n_lambda; ++l) {
        if (!(lambda_grid[l] >= 0.0)) throw DomainError("oracle lambda values must be non-negative");
        if (lambda_grid[l] > 0.0) {
            zstar_neg[l] = invert_normal_deficit(1.0 / (lambda_grid[l] * s_neg));
            zstar_pos[l] = invert_normal_deficit(1.0 / (lambda_grid[l] * s_pos));
        }
    }

    const long chunk_size = 100000;
    const long chunks = (draws + chunk_size - 1) / chunk_size;
    std::vector<std::vector<double>> acc_gamma(static_cast<std::size_t>(chunks),
                                               std::vector<double>(n_gamma, 0.0));
    std::vector<std::vector<double>> acc_psi1(static_cast<std::size_t>(chunks),
                                              std::vector<double>(n_lambda, 0.0));
    std::vector<std::vector<double>> acc_psi2(static_cast<std::size_t>(chunks),
                                              std::vector<double>(n_lambda, 0.0));

    parallel_for(static_cast<int>(chunks), [&](int c) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c) + 0xACE1));
        const long lo = static_cast<long>(c) * chunk_size;
        const long hi = std::min(draws, lo + chunk_size);
        auto& ag = acc_gamma[static_cast<std::size_t>(c)];
        auto& a1 = acc_psi1[static_cast<std::size_t>(c)];
        auto& a2 = acc_psi2[static_cast<std::size_t>(c)];
        for (long i = lo; i < hi; ++i) {
            const double u01 = rng.uniform_pos();
            const double x = sx * norm_quantile(cdf_lo + u01 * (cdf_hi - cdf_lo));
            const double e = truth.propensity(x);
            const double m = truth.outcome_mean(x);
            const double s = x > 0.0 ? s_pos : s_neg;
            for (std::size_t g = 0; g < n_gamma; ++g) {
                const double gamma = gamma_grid[g];
                const double alpha_star = gamma / (1.0 + gamma);
                const double w_minus = (1.0 - 1.0 / gamma) * e + 1.0 / gamma;
                const double w_plus = (1.0 - gamma) * e + gamma;
                const double mu_plus = m * (1.0 - alpha_star) + s * phi_alpha[g];
                const double mu_minus = m * alpha_star - s * phi_alpha[g];
                ag[g] += w_plus * mu_plus + w_minus * mu_minus;
            }
            for (std::size_t l = 0; l < n_lambda; ++l) {
                const double lambda = lambda_grid[l];
                if (lambda == 0.0) {
                    a1[l] += 1.0;
                    a2[l] += m;
                    continue;
                }
                const double z = x > 0.0 ? zstar_pos[l] : zstar_neg[l];
                a1[l] += lambda * lambda * s * s * normal_deficit_sq(z);
                a2[l] += m - lambda * s * s * norm_cdf(z);
            }
        }
    });

    PopulationValues values;
    values.convention = convention;
    values.gamma_grid = gamma_grid;
    values.lambda_grid = lambda_grid;
    values.psi_gamma.assign(n_gamma, 0.0);
    values.psi1.assign(n_lambda, 0.0);
    values.psi2.assign(n_lambda, 0.0);
    for (long c = 0; c < chunks; ++c) {
        for (std::size_t g = 0; g < n_gamma; ++g) {
            values.psi_gamma[g] += acc_gamma[static_cast<std::size_t>(c)][g];
        }
        for (std::size_t l = 0; l < n_lambda; ++l) {
            values.psi1[l] += acc_psi1[static_cast<std::size_t>(c)][l];
            values.psi2[l] += acc_psi2[static_cast<std::size_t>(c)][l];
        }
    }
    const double inv = 1.0 / static_cast<double>(draws);
    for (auto& v : values.psi_gamma) v *= inv;
    for (auto& v : values.psi1) v *= inv;
    for (auto& v : values.psi2) v *= inv;
    return values;
}

NuisanceFactory study_nuisance_factory(const DgpTruth& truth, bool true_propensity,
                                       bool true_outcome, const AnalysisConfig& config) {
    if (true_propensity && true_outcome) {
        auto outcome = std::make_shared<TrueOutcomeModel>(truth, 1025);
        return [truth, outcome](const ObservationalDataset&, const std::vector<int>&) {
            NuisanceFit fit;
            fit.propensity = [truth](const Eigen::RowVectorXd& x) { return truth.propensity(x[0]); };
            fit.outcome = outcome;
            return fit;
        };
    }
    const NuisanceFactory fitted = default_nuisance_factory(config);
    auto outcome = std::make_shared<TrueOutcomeModel>(truth, 1025);
    return [truth, fitted, outcome, true_propensity, true_outcome](
               const ObservationalDataset& data, const std::vector<int>& train_rows) {
        NuisanceFit fit = fitted(data, train_rows);
        if (true_propensity) {
            fit.propensity = [truth](const Eigen::RowVectorXd& x) { return truth.propensity(x[0]); };
        }
        if (true_outcome) fit.outcome = outcome;
        return fit;
    };
}

AnalysisConfig StudyConfig::analysis(int) const {
    AnalysisConfig cfg;
    cfg.alpha = alpha;
    cfg.bootstrap_reps = bootstrap_reps;
    cfg.K = K;
    cfg.seed = seed;
    cfg.grid_points = grid_points;
    cfg.bandwidth_scale_x = bandwidth_scale_x;
    cfg.bandwidth_scale_y = bandwidth_scale_y;
    cfg.mean_shift = mean_shift;
    return cfg;
}

namespace {

struct NuisanceFlags {
    bool true_e = false;
    bool true_dens = false;
};

NuisanceFlags parse_config_name(const std::string& name) {
    if (name == "est_est") return {false, false};
    if (name == "true_e") return {true, false};
    if (name == "true_dens") return {false, true};
    if (name == "true_both") return {true, true};
    throw ConfigError("unknown nuisance config '" + name + "'");
}

// Shared per-replicate evaluation for the RMSE and coverage studies: a
// single cross-fit pass yields the one-step and plug-in columns for every
// requested gamma and lambda.
struct RepEstimates {
    std::vector<PsiEstimate> psi_gamma_onestep;
    std::vector<double> psi_gamma_direct;
    std::vector<PsiEstimate> psi1_onestep, psi2_onestep;
    std::vector<double> psi1_direct, psi2_direct;
};

RepEstimates evaluate_replicate(const ObservationalDataset& data, const FoldPlan& folds,
                                const std::vector<double>& gammas,
                                const std::vector<double>& lambdas, const NuisanceFactory& factory) {
    const int n_gamma = static_cast<int>(gammas.size());
    const int n_lambda = static_cast<int>(lambdas.size());
    // columns: [phi_g | plug_g] per gamma, then [phi1 | phi2 | z h^2 | z h y] per lambda, then z
    const int cols = 2 * n_gamma + 4 * n_lambda + 1;

    CrossFitEvaluator evaluator;
    evaluator.columns = cols;
    evaluator.eval = [&gammas, &lambdas, n_gamma, n_lambda](
                         const ConditionalDensity& density, double e, const Eigen::RowVectorXd&,
                         int z, double y, Eigen::Ref<Eigen::RowVectorXd> out) {
        for (int g = 0; g < n_gamma; ++g) {
            const LInfSolution sol = quantile_balancing(density, e, gammas[static_cast<std::size_t>(g)],
                                                        BoundSide::Upper);
            out[2 * g] = eif_phi(sol, z, y);
            out[2 * g + 1] = sol.plug_in();
        }
        std::optional<double> warm;
        const int base = 2 * n_gamma;
        for (int l = 0; l < n_lambda; ++l) {
            const double lambda = lambdas[static_cast<std::size_t>(l)];
            if (lambda == 0.0) {
                out[base + 4 * l] = 1.0;
                out[base + 4 * l + 1] = static_cast<double>(z) / e * (y - density.mean()) + density.mean();
                out[base + 4 * l + 2] = static_cast<double>(z);
                out[base + 4 * l + 3] = static_cast<double>(z) * y;
                continue;
            }
            const L2Solution sol = solve_lagrangian(density, lambda, warm);
            warm = sol.xi;
            const double h = sol.h_star(y);
            out[base + 4 * l] = eif_phi1(sol, z, y, e);
            out[base + 4 * l + 1] = eif_phi2(sol, z, y, e);
            out[base + 4 * l + 2] = static_cast<double>(z) * h * h;
            out[base + 4 * l + 3] = static_cast<double>(z) * h * y;
        }
        out[2 * n_gamma + 4 * n_lambda] = static_cast<double>(z);
    };

    const Eigen::MatrixXd m = cross_fit(data, folds, factory, evaluator);
    const double treated = m.col(cols - 1).sum();

    RepEstimates rep;
    for (int g = 0; g < n_gamma; ++g) {
        rep.psi_gamma_onestep.push_back(pool_cross_fitted(m.col(2 * g), folds));
        rep.psi_gamma_direct.push_back(m.col(2 * g + 1).mean());
    }
    const int base = 2 * n_gamma;
    for (int l = 0; l < n_lambda; ++l) {
        rep.psi1_onestep.push_back(pool_cross_fitted(m.col(base + 4 * l), folds));
        rep.psi2_onestep.push_back(pool_cross_fitted(m.col(base + 4 * l + 1), folds));
        rep.psi1_direct.push_back(m.col(base + 4 * l + 2).sum() / treated);
        rep.psi2_direct.push_back(m.col(base + 4 * l + 3).sum() / treated);
    }
    return rep;
}

double rmse_against(const std::vector<double>& estimates, double truth) {
    double acc = 0.0;
    for (double v : estimates) acc += (v - truth) * (v - truth);
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

}  // namespace

StudyReport run_rmse_study(const StudyConfig& config) {
    const DgpTruth truth{config.misspecify, config.convention};
    const PopulationValues pop =
        oracle_population_values(config.gamma_values, config.lambda_values,
                                 derive_seed(config.seed, 0x0AC1E), config.convention,
                                 config.misspecify, config.oracle_draws);

    StudyReport report;
    report.reps = config.reps;
    report.convention = config.convention;
    report.misspecify = config.misspecify;
    report.seed = config.seed;

    for (int n : config.sample_sizes) {
        const AnalysisConfig analysis = config.analysis(n);
        for (const std::string& name : config.nuisance_configs) {
            const NuisanceFlags flags = parse_config_name(name);
            const NuisanceFactory factory =
                study_nuisance_factory(truth, flags.true_e, flags.true_dens, analysis);

            std::vector<RepEstimates> reps(static_cast<std::size_t>(config.reps));
            parallel_for(config.reps, [&](int r) {
                const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
                const DgpSample sample =
                    generate_dgp(n, rep_seed, config.misspecify, config.convention);
                const FoldPlan folds = make_folds(n, config.K, derive_seed(rep_seed, 0xF07D));
                reps[static_cast<std::size_t>(r)] = evaluate_replicate(
                    sample.dataset, folds, config.gamma_values, config.lambda_values, factory);
            });

            auto add_cell = [&](const std::string& estimator, const std::string& family,
                                double param, double value) {
                report.cells.push_back({"rmse", estimator, name, n, family, param, value});
            };
            for (std::size_t g = 0; g < config.gamma_values.size(); ++g) {
                std::vector<double> onestep, direct;
                for (const auto& rep : reps) {
                    onestep.push_back(rep.psi_gamma_onestep[g].value);
                    direct.push_back(rep.psi_gamma_direct[g]);
                }
                add_cell("one_step", "psi_gamma", config.gamma_values[g],
                         rmse_against(onestep, pop.psi_gamma[g]));
                add_cell("direct", "psi_gamma", config.gamma_values[g],
                         rmse_against(direct, pop.psi_gamma[g]));
            }
            for (std::size_t l = 0; l < config.lambda_values.size(); ++l) {
                std::vector<double> o1, d1, o2, d2;
                for (const auto& rep : reps) {
                    o1.push_back(rep.psi1_onestep[l].value);
                    d1.push_back(rep.psi1_direct[l]);
                    o2.push_back(rep.psi2_onestep[l].value);
                    d2.push_back(rep.psi2_direct[l]);
                }
                add_cell("one_step", "psi1", config.lambda_values[l], rmse_against(o1, pop.psi1[l]));
                add_cell("direct", "psi1", config.lambda_values[l], rmse_against(d1, pop.psi1[l]));
                add_cell("one_step", "psi2", config.lambda_values[l], rmse_against(o2, pop.psi2[l]));
                add_cell("direct", "psi2", config.lambda_values[l], rmse_against(d2, pop.psi2[l]));
            }
        }
    }
    return report;
}

StudyReport run_coverage_study(const StudyConfig& config) {
    const DgpTruth truth{config.misspecify, config.convention};
    const PopulationValues pop =
        oracle_population_values(config.gamma_values, config.lambda_values,
                                 derive_seed(config.seed, 0x0AC1E), config.convention,
                                 config.misspecify, config.oracle_draws);

    StudyReport report;
    report.reps = config.reps;
    report.convention = config.convention;
    report.misspecify = config.misspecify;
    report.seed = config.seed;

    for (int n : config.sample_sizes) {
        const AnalysisConfig analysis = config.analysis(n);
        for (const std::string& name : config.nuisance_configs) {
            const NuisanceFlags flags = parse_config_name(name);
            const NuisanceFactory factory =
                study_nuisance_factory(truth, flags.true_e, flags.true_dens, analysis);

            std::vector<RepEstimates> reps(static_cast<std::size_t>(config.reps));
            parallel_for(config.reps, [&](int r) {
                const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
                const DgpSample sample =
                    generate_dgp(n, rep_seed, config.misspecify, config.convention);
                const FoldPlan folds = make_folds(n, config.K, derive_seed(rep_seed, 0xF07D));
                reps[static_cast<std::size_t>(r)] = evaluate_replicate(
                    sample.dataset, folds, config.gamma_values, config.lambda_values, factory);
            });

            auto coverage = [&](const std::function<const PsiEstimate&(const RepEstimates&)>& pick,
                                double target) {
                int covered = 0;
                for (const auto& rep : reps) {
                    const PsiEstimate& est = pick(rep);
                    if (est.ci_lo(config.alpha) <= target && target <= est.ci_hi(config.alpha)) {
                        ++covered;
                    }
                }
                return static_cast<double>(covered) / static_cast<double>(config.reps);
            };

            for (std::size_t g = 0; g < config.gamma_values.size(); ++g) {
                report.cells.push_back(
                    {"coverage", "one_step", name, n, "psi_gamma", config.gamma_values[g],
                     coverage([g](const RepEstimates& r) -> const PsiEstimate& {
                         return r.psi_gamma_onestep[g];
                     }, pop.psi_gamma[g])});
            }
            for (std::size_t l = 0; l < config.lambda_values.size(); ++l) {
                report.cells.push_back(
                    {"coverage", "one_step", name, n, "psi1", config.lambda_values[l],
                     coverage([l](const RepEstimates& r) -> const PsiEstimate& {
                         return r.psi1_onestep[l];
                     }, pop.psi1[l])});
                report.cells.push_back(
                    {"coverage", "one_step", name, n, "psi2", config.lambda_values[l],
                     coverage([l](const RepEstimates& r) -> const PsiEstimate& {
                         return r.psi2_onestep[l];
                     }, pop.psi2[l])});
            }
        }
    }
    return report;
}

StudyReport run_uniform_study(const StudyConfig& config) {
    const DgpTruth truth{config.misspecify, config.convention};
    const PopulationValues pop =
        oracle_population_values(config.gamma_band_grid, config.lambda_band_grid,
                                 derive_seed(config.seed, 0x0AC1E), config.convention,
                                 config.misspecify, config.oracle_draws);
    const double z_pw = norm_quantile(1.0 - config.alpha / 2.0);

    StudyReport report;
    report.reps = config.reps;
    report.convention = config.convention;
    report.misspecify = config.misspecify;
    report.seed = config.seed;

    struct RepBand {
        double q_gamma = 0, q_psi1 = 0, q_psi2 = 0;
        bool mb_gamma = false, mb_psi1 = false, mb_psi2 = false;
        bool pw_gamma = false, pw_psi1 = false, pw_psi2 = false;
    };

    for (int n : config.sample_sizes) {
        const AnalysisConfig analysis = config.analysis(n);
        for (const std::string& name : config.nuisance_configs) {
            const NuisanceFlags flags = parse_config_name(name);
            const NuisanceFactory factory =
                study_nuisance_factory(truth, flags.true_e, flags.true_dens, analysis);

            std::vector<RepBand> reps(static_cast<std::size_t>(config.reps));
            parallel_for(config.reps, [&](int r) {
                const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
                const DgpSample sample =
                    generate_dgp(n, rep_seed, config.misspecify, config.convention);
                const FoldPlan folds = make_folds(n, config.K, derive_seed(rep_seed, 0xF07D));

                const LInfCurve curve = estimate_psi(sample.dataset, folds, config.gamma_band_grid,
                                                     BoundSide::Upper, analysis, &factory);
                const auto l2curve = estimate_l2_curve(sample.dataset, folds,
                                                       config.lambda_band_grid,
                                                       OutcomeSign::Minimize, analysis, &factory);

                auto check = [&](const std::vector<PsiEstimate>& ests,
                                 const std::vector<double>& truths, std::uint64_t stream,
                                 double& qhat, bool& mb_cover, bool& pw_cover) {
                    const int G = static_cast<int>(ests.size());
                    Eigen::MatrixXd eif(ests.front().n, G);
                    std::vector<double> values(static_cast<std::size_t>(G)),
                        ses(static_cast<std::size_t>(G));
                    for (int g = 0; g < G; ++g) {
                        eif.col(g) = ests[static_cast<std::size_t>(g)].per_unit_eif;
                        values[static_cast<std::size_t>(g)] = ests[static_cast<std::size_t>(g)].value;
                        ses[static_cast<std::size_t>(g)] = ests[static_cast<std::size_t>(g)].se;
                    }
                    qhat = multiplier_bootstrap(eif, values, ses, config.alpha,
                                                config.bootstrap_reps, derive_seed(rep_seed, stream));
                    mb_cover = true;
                    pw_cover = true;
                    for (int g = 0; g < G; ++g) {
                        const double dev =
                            std::abs(values[static_cast<std::size_t>(g)] -
                                     truths[static_cast<std::size_t>(g)]);
                        const double se = ses[static_cast<std::size_t>(g)];
                        if (dev > qhat * se) mb_cover = false;
                        if (dev > z_pw * se) pw_cover = false;
                    }
                };

                RepBand& out = reps[static_cast<std::size_t>(r)];
                check(curve.estimates, pop.psi_gamma, 0xB1, out.q_gamma, out.mb_gamma, out.pw_gamma);
                std::vector<PsiEstimate> e1, e2;
                for (const auto& point : l2curve) {
                    e1.push_back(point.psi1);
                    e2.push_back(point.psi2);
                }
                check(e1, pop.psi1, 0xB2, out.q_psi1, out.mb_psi1, out.pw_psi1);
                check(e2, pop.psi2, 0xB3, out.q_psi2, out.mb_psi2, out.pw_psi2);
            });

            auto frac = [&](const std::function<bool(const RepBand&)>& flag) {
                int c = 0;
                for (const auto& rep : reps) c += flag(rep) ? 1 : 0;
                return static_cast<double>(c) / static_cast<double>(config.reps);
            };
            auto mean_q = [&](const std::function<double(const RepBand&)>& pick) {
                double s = 0.0;
                for (const auto& rep : reps) s += pick(rep);
                return s / static_cast<double>(config.reps);
            };

            auto emit = [&](const std::string& family, double qbar, double mb, double pw) {
                report.cells.push_back({"critical_value", "mb", name, n, family, 0.0, qbar});
                report.cells.push_back({"uniform_coverage", "mb", name, n, family, 0.0, mb});
                report.cells.push_back({"uniform_coverage", "pointwise", name, n, family, 0.0, pw});
            };
            emit("psi_gamma", mean_q([](const RepBand& r) { return r.q_gamma; }),
                 frac([](const RepBand& r) { return r.mb_gamma; }),
                 frac([](const RepBand& r) { return r.pw_gamma; }));
            emit("psi1", mean_q([](const RepBand& r) { return r.q_psi1; }),
                 frac([](const RepBand& r) { return r.mb_psi1; }),
                 frac([](const RepBand& r) { return r.pw_psi1; }));
            emit("psi2", mean_q([](const RepBand& r) { return r.q_psi2; }),
                 frac([](const RepBand& r) { return r.mb_psi2; }),
                 frac([](const RepBand& r) { return r.pw_psi2; }));
        }
    }
    return report;
}

}  // namespace msens
