// cpp-predict: command-line front end for conformal-projective prediction.

#include <cmath>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cpred/basis.hpp"
#include "cpred/config.hpp"
#include "cpred/conjugate.hpp"
#include "cpred/csv.hpp"
#include "cpred/errors.hpp"
#include "cpred/gp.hpp"
#include "cpred/lab.hpp"
#include "cpred/report.hpp"
#include "cpred/split_eval.hpp"
#include "cpred/splits.hpp"
#include "cpred/standardize.hpp"
#include "cpred/variance.hpp"
#include "json.hpp"

using namespace cpred;
using nlohmann::json;

namespace {

struct DataArgs {
  std::string data;
  std::string response;
  std::string missing;  // empty: take the config value
  bool standardize = false;
};

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string xnew;
  std::string outliers;
  std::string divergence;
  std::optional<double> alpha;
  std::optional<double> sigma2;
  DataArgs data;
};

RunConfig load_config(const Options& o, const std::string& command) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::from_file(o.config_path);
  if (!cfg.command.empty() && cfg.command != command) {
    throw InvalidInput("config is for '" + cfg.command + "' but the command is '" + command + "'");
  }
  cfg.command = command;
  if (!o.divergence.empty() || o.alpha) {
    cfg.divergence = parse_divergence(o.divergence.empty() ? cfg.divergence.name() : o.divergence,
                                      o.alpha.value_or(cfg.divergence.alpha));
  }
  if (o.sigma2) cfg.prior.sigma2 = o.sigma2;
  if (cfg.apply_env_seed()) std::cerr << "seed overridden by CPP_SEED: " << cfg.seed << '\n';
  cfg.validate();
  return cfg;
}

LoadedData load_data(const Options& o, const RunConfig& cfg) {
  const std::string policy = o.data.missing.empty() ? cfg.split_eval.missing : o.data.missing;
  if (policy != "reject" && policy != "drop") throw InvalidInput("--missing must be reject or drop");
  LoadedData d = load_csv(o.data.data, o.data.response,
                          policy == "drop" ? MissingPolicy::Drop : MissingPolicy::Reject);
  if (!d.dropped_rows.empty()) {
    std::cerr << "dropped " << d.dropped_rows.size() << " rows with missing values\n";
  }
  for (const std::string& c : d.constant_columns) std::cerr << "warning: constant column '" << c << "'\n";
  return d;
}

PriorSpec make_prior(const RunConfig& cfg, Eigen::Index p) {
  PriorSpec prior = PriorSpec::isotropic(p, cfg.prior.v_scale, cfg.prior.beta0);
  prior.sigma2 = cfg.prior.sigma2;
  return prior;
}

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

int cmd_fit(const Options& o) {
  const RunConfig cfg = load_config(o, "fit");
  LoadedData ld = load_data(o, cfg);
  Dataset data = ld.data;
  if (o.data.standardize) data = standardize(data).first;
  if (cfg.backend == Backend::Basis) data.X = basis_expand(data.X, cfg.basis);
  if (cfg.backend == Backend::Gp) throw InvalidInput("fit reports the linear posterior; use predict for the GP backend");
  const PriorSpec prior = make_prior(cfg, data.p());
  const PosteriorState st = fit_posterior(data, prior);
  json j;
  j["n"] = data.n();
  j["p"] = data.p();
  j["covariates"] = ld.covariate_names;
  j["response"] = ld.response_name;
  j["beta_hat"] = vec_json(st.beta_hat);
  j["max_leverage"] = st.leverages.maxCoeff();
  if (!prior.sigma2) {
    const InverseGammaParams ig = sigma2_posterior(data, prior, st, cfg.prior.a0, cfg.prior.b0);
    j["sigma2_posterior"] = {{"shape", ig.shape}, {"scale", ig.scale},
                             {"mean", ig.shape > 1.0 ? json(ig.mean()) : json(nullptr)}};
  } else {
    j["sigma2"] = *prior.sigma2;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_predict(const Options& o) {
  const RunConfig cfg = load_config(o, "predict");
  const LoadedData ld = load_data(o, cfg);
  Dataset data = ld.data;
  Eigen::VectorXd x_new = parse_numeric_row(o.xnew);
  if (x_new.size() != data.p()) {
    throw InvalidInput("--xnew has " + std::to_string(x_new.size()) + " values, expected " +
                       std::to_string(data.p()));
  }
  ScalarStandardizer sy;
  if (o.data.standardize) {
    const Standardizer sx = Standardizer::fit(data.X);
    sy = ScalarStandardizer::fit(data.y);
    data.X = sx.apply(data.X);
    data.y = sy.apply(data.y);
    x_new = sx.apply_row(x_new);
  }
  const CppConfig cpp = cfg.cpp_config();
  CppPrediction pr;
  if (cfg.backend == Backend::Gp) {
    if (!cfg.prior.sigma2) throw InvalidInput("the GP backend needs a known prior.sigma2 (or --sigma2)");
    const GpModel model(data.X, data.y, cfg.kernel, *cfg.prior.sigma2);
    const CppProblem prob = gp_problem(model, x_new, cfg.divergence, std::sqrt(*cfg.prior.sigma2));
    const CppSolution s = solve(prob, cpp);
    pr.a_star = s.a_star;
    pr.map_pred = prob.map_prediction;
    pr.pred_var = gp_predictive(model, x_new).var;
    pr.sigma_hat = prob.sigma_hat;
    pr.boundary_draws = s.boundary ? 1 : 0;
    pr.nonconvex_draws = s.convexity_ok ? 0 : 1;
  } else {
    if (cfg.backend == Backend::Basis) {
      data.X = basis_expand(data.X, cfg.basis);
      x_new = basis_expand_row(x_new, cfg.basis);
    }
    const PriorSpec prior = make_prior(cfg, data.p());
    const PosteriorState st = fit_posterior(data, prior);
    if (prior.sigma2) {
      pr = predict_known_variance(st, data, x_new, *prior.sigma2, cfg.divergence, cpp);
    } else {
      const auto draws = draw_inverse_gamma(sigma2_posterior(data, prior, st, cfg.prior.a0, cfg.prior.b0),
                                            cfg.n_draws, cfg.seed);
      pr = predict_unknown_variance(st, data, x_new, draws, cfg.divergence, cpp, cfg.approach);
    }
  }
  const double scale = o.data.standardize ? sy.sd : 1.0;
  const double shift = o.data.standardize ? sy.mean : 0.0;
  json j;
  j["divergence"] = cfg.divergence.name();
  if (cfg.divergence.type == DivergenceType::DPD) j["alpha"] = cfg.divergence.alpha;
  j["backend"] = backend_name(cfg.backend);
  j["a_star"] = shift + scale * pr.a_star;
  j["map_prediction"] = shift + scale * pr.map_pred;
  j["predictive_var"] = scale * scale * pr.pred_var;
  j["sigma_hat"] = scale * pr.sigma_hat;
  j["boundary_draws"] = pr.boundary_draws;
  j["nonconvex_draws"] = pr.nonconvex_draws;
  j["seed"] = cfg.seed;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_simulate(const Options& o) {
  const RunConfig cfg = load_config(o, "simulate");
  const ScenarioSummary s = run_scenario(cfg.scenario());
  emit_results(s, cfg, o.out_dir);
  std::cout << "mean MLPD " << s.mean_mlpd << " (SE " << s.se << "), " << s.pct_positive
            << "% positive, " << s.n_failed << " failed; results in " << o.out_dir << '\n';
  return 0;
}

int cmd_split_eval(const Options& o) {
  RunConfig cfg = load_config(o, "split-eval");
  if (!o.outliers.empty()) cfg.split_eval.outliers = o.outliers;
  const LoadedData ld = load_data(o, cfg);
  const std::vector<Eigen::Index> outliers = resolve_outliers(cfg.split_eval.outliers, ld.data);
  SplitPlan plan;
  plan.n_splits = cfg.split_eval.n_splits;
  plan.n_clean_test = cfg.split_eval.n_clean_test;
  plan.outlier_indices = outliers;
  plan.seed = cfg.seed;
  const SplitEvalReport rep = split_eval(ld.data, plan, cfg.split_eval_config());
  emit_results(rep, cfg, o.data.data, o.data.response, outliers, o.out_dir);
  std::cout << "mean MLPD " << rep.mean_mlpd << " (SE " << rep.se << "), " << rep.n_positive << "/"
            << rep.splits.size() << " splits positive; gain clean " << rep.gain_clean
            << ", outlier " << rep.gain_outlier << "; results in " << o.out_dir << '\n';
  return 0;
}

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--response", o.data.response, "response column name")->required();
  cmd->add_option("--missing", o.data.missing, "missing-cell policy: reject or drop");
}

void add_method_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--divergence", o.divergence, "logbc, hellinger or dpd");
  cmd->add_option("--alpha", o.alpha, "DPD tuning parameter");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal-projective prediction"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "fit the conjugate posterior and report it");
  add_data_options(fit, o);
  add_method_options(fit, o);
  fit->add_option("--sigma2", o.sigma2, "known noise variance");
  fit->add_flag("--standardize", o.data.standardize, "standardize covariates first");

  auto* predict = app.add_subcommand("predict", "CPP point prediction at one covariate row");
  add_data_options(predict, o);
  add_method_options(predict, o);
  predict->add_option("--xnew", o.xnew, "comma-separated covariate values")->required();
  predict->add_option("--sigma2", o.sigma2, "known noise variance");
  predict->add_flag("--standardize", o.data.standardize, "standardize covariates and response");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo contamination scenario");
  add_method_options(simulate, o);
  simulate->add_option("--out", o.out_dir, "output directory")->required();

  auto* split = app.add_subcommand("split-eval", "repeated random-split evaluation");
  add_data_options(split, o);
  add_method_options(split, o);
  split->add_option("--outliers", o.outliers, "1-based rows, 'iqr' or 'studentized'");
  split->add_option("--out", o.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (fit->parsed()) return cmd_fit(o);
    if (predict->parsed()) return cmd_predict(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (split->parsed()) return cmd_split_eval(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
