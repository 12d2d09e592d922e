#include "cpred/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cpred/errors.hpp"
#include "json.hpp"

namespace cpred {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw InvalidInput("unknown config key '" + where + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) {
    out = j.at(key).is_null() ? std::nullopt : std::optional<T>(j.at(key).get<T>());
  }
}

std::string summary_name(Summary s) { return s == Summary::Mean ? "mean" : "median"; }

Summary parse_summary(const std::string& s) {
  if (s == "mean") return Summary::Mean;
  if (s == "median") return Summary::Median;
  throw InvalidInput("summary must be 'mean' or 'median'");
}

Approach parse_approach(const std::string& s) {
  if (s == "I" || s == "1") return Approach::I;
  if (s == "II" || s == "2") return Approach::II;
  throw InvalidInput("approach must be 'I' or 'II'");
}

std::string kernel_name(KernelSpec::Kind k) {
  return k == KernelSpec::Kind::Linear ? "linear" : "se";
}

std::string basis_name(BasisSpec::Kind k) {
  switch (k) {
    case BasisSpec::Kind::Identity:
      return "identity";
    case BasisSpec::Kind::Polynomial:
      return "polynomial";
    case BasisSpec::Kind::Spline:
      return "spline";
  }
  return "identity";
}

}  // namespace

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Linear:
      return "linear";
    case Backend::Basis:
      return "basis";
    case Backend::Gp:
      return "gp";
  }
  return "linear";
}

Backend parse_backend(const std::string& name) {
  if (name == "linear") return Backend::Linear;
  if (name == "basis") return Backend::Basis;
  if (name == "gp") return Backend::Gp;
  throw InvalidInput("backend must be linear, basis or gp");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  reject_unknown(j,
                 {"command", "seed", "divergence", "alpha", "prior", "n_draws", "grid_len",
                  "window_sd", "refine_tol", "summary", "truncate_quantile", "approach", "backend",
                  "basis", "kernel", "simulate", "split_eval"},
                 "");
  RunConfig c;
  try {
    read(j, "command", c.command);
    read(j, "seed", c.seed);
    std::string div = c.divergence.name();
    double alpha = c.divergence.alpha;
    read(j, "divergence", div);
    read(j, "alpha", alpha);
    c.divergence = parse_divergence(div, alpha);
    read(j, "n_draws", c.n_draws);
    read(j, "grid_len", c.grid_len);
    read(j, "window_sd", c.window_sd);
    read(j, "refine_tol", c.refine_tol);
    std::string s = summary_name(c.summary);
    read(j, "summary", s);
    c.summary = parse_summary(s);
    read_opt(j, "truncate_quantile", c.truncate_quantile);
    std::string a = "I";
    read(j, "approach", a);
    c.approach = parse_approach(a);
    std::string b = backend_name(c.backend);
    read(j, "backend", b);
    c.backend = parse_backend(b);

    if (j.contains("prior")) {
      const json& p = j.at("prior");
      reject_unknown(p, {"beta0", "v_scale", "a0", "b0", "sigma2"}, "prior.");
      read(p, "beta0", c.prior.beta0);
      read(p, "v_scale", c.prior.v_scale);
      read(p, "a0", c.prior.a0);
      read(p, "b0", c.prior.b0);
      read_opt(p, "sigma2", c.prior.sigma2);
    }
    if (j.contains("basis")) {
      const json& p = j.at("basis");
      reject_unknown(p, {"kind", "degree", "knots", "intercept"}, "basis.");
      std::string kind = basis_name(c.basis.kind);
      read(p, "kind", kind);
      c.basis.kind = parse_basis_kind(kind);
      read(p, "degree", c.basis.degree);
      read(p, "knots", c.basis.knots);
      read(p, "intercept", c.basis.intercept);
    }
    if (j.contains("kernel")) {
      const json& p = j.at("kernel");
      reject_unknown(p, {"kind", "lengthscale", "signal_var", "mean_const"}, "kernel.");
      std::string kind = kernel_name(c.kernel.kind);
      read(p, "kind", kind);
      c.kernel.kind = parse_kernel_kind(kind);
      read(p, "lengthscale", c.kernel.lengthscale);
      read(p, "signal_var", c.kernel.signal_var);
      read(p, "mean_const", c.kernel.mean_const);
    }
    if (j.contains("simulate")) {
      const json& p = j.at("simulate");
      reject_unknown(p, {"n", "p", "sigma", "beta_true", "outlier_frac", "outlier_scale",
                         "n_replicates", "n_test"},
                     "simulate.");
      read(p, "n", c.simulate.n);
      read(p, "p", c.simulate.p);
      read(p, "sigma", c.simulate.sigma);
      read(p, "beta_true", c.simulate.beta_true);
      read(p, "outlier_frac", c.simulate.outlier_frac);
      read(p, "outlier_scale", c.simulate.outlier_scale);
      read(p, "n_replicates", c.simulate.n_replicates);
      read(p, "n_test", c.simulate.n_test);
    }
    if (j.contains("split_eval")) {
      const json& p = j.at("split_eval");
      reject_unknown(p, {"n_splits", "n_clean_test", "outliers", "missing"}, "split_eval.");
      read(p, "n_splits", c.split_eval.n_splits);
      read(p, "n_clean_test", c.split_eval.n_clean_test);
      read(p, "outliers", c.split_eval.outliers);
      read(p, "missing", c.split_eval.missing);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config has a field of the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text(int indent) const {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["divergence"] = divergence.name();
  j["alpha"] = divergence.alpha;
  j["prior"] = {{"beta0", prior.beta0},
                {"v_scale", prior.v_scale},
                {"a0", prior.a0},
                {"b0", prior.b0},
                {"sigma2", prior.sigma2 ? json(*prior.sigma2) : json(nullptr)}};
  j["n_draws"] = n_draws;
  j["grid_len"] = grid_len;
  j["window_sd"] = window_sd;
  j["refine_tol"] = refine_tol;
  j["summary"] = summary_name(summary);
  j["truncate_quantile"] = truncate_quantile ? json(*truncate_quantile) : json(nullptr);
  j["approach"] = approach == Approach::I ? "I" : "II";
  j["backend"] = backend_name(backend);
  j["basis"] = {{"kind", basis_name(basis.kind)},
                {"degree", basis.degree},
                {"knots", basis.knots},
                {"intercept", basis.intercept}};
  j["kernel"] = {{"kind", kernel_name(kernel.kind)},
                 {"lengthscale", kernel.lengthscale},
                 {"signal_var", kernel.signal_var},
                 {"mean_const", kernel.mean_const}};
  j["simulate"] = {{"n", simulate.n},
                   {"p", simulate.p},
                   {"sigma", simulate.sigma},
                   {"beta_true", simulate.beta_true},
                   {"outlier_frac", simulate.outlier_frac},
                   {"outlier_scale", simulate.outlier_scale},
                   {"n_replicates", simulate.n_replicates},
                   {"n_test", simulate.n_test}};
  j["split_eval"] = {{"n_splits", split_eval.n_splits},
                     {"n_clean_test", split_eval.n_clean_test},
                     {"outliers", split_eval.outliers},
                     {"missing", split_eval.missing}};
  return j.dump(indent);
}

bool RunConfig::apply_env_seed() {
  const char* env = std::getenv("CPP_SEED");
  if (!env || !*env) return false;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    seed = v;
  } catch (const std::exception&) {
    throw InvalidInput(std::string("CPP_SEED is not an unsigned integer: ") + env);
  }
  return true;
}

void RunConfig::validate() const {
  if (!command.empty() && command != "fit" && command != "predict" && command != "simulate" &&
      command != "split-eval") {
    throw InvalidInput("unknown command '" + command + "'");
  }
  divergence.validate();
  if (!(prior.v_scale > 0.0)) throw InvalidInput("prior.v_scale must be positive");
  if (!(prior.a0 > 0.0) || !(prior.b0 > 0.0)) throw InvalidInput("prior.a0 and prior.b0 must be positive");
  if (prior.sigma2 && !(*prior.sigma2 > 0.0)) throw InvalidInput("prior.sigma2 must be positive");
  if (n_draws < 1) throw InvalidInput("n_draws must be positive");
  cpp_config().validate();
  if (split_eval.missing != "reject" && split_eval.missing != "drop") {
    throw InvalidInput("split_eval.missing must be 'reject' or 'drop'");
  }
  if (backend == Backend::Gp) kernel.validate();
}

CppConfig RunConfig::cpp_config() const {
  CppConfig c;
  c.grid_len = grid_len;
  c.window_sd = window_sd;
  c.refine_tol = refine_tol;
  c.summary = summary;
  c.truncate_quantile = truncate_quantile;
  return c;
}

SimScenario RunConfig::scenario() const {
  SimScenario s;
  s.n = simulate.n;
  s.p = simulate.p;
  s.sigma = simulate.sigma;
  if (!simulate.beta_true.empty()) {
    s.beta_true = Eigen::Map<const Eigen::VectorXd>(simulate.beta_true.data(),
                                                    static_cast<Eigen::Index>(simulate.beta_true.size()));
  }
  s.outlier_frac = simulate.outlier_frac;
  s.outlier_scale = simulate.outlier_scale;
  s.n_replicates = simulate.n_replicates;
  s.divergence = divergence;
  s.seed = seed;
  s.n_test = simulate.n_test;
  s.n_draws = n_draws;
  s.a0 = prior.a0;
  s.b0 = prior.b0;
  s.v_scale = prior.v_scale;
  s.approach = approach;
  s.cpp = cpp_config();
  return s;
}

SplitEvalConfig RunConfig::split_eval_config() const {
  SplitEvalConfig c;
  c.divergence = divergence;
  c.v_scale = prior.v_scale;
  c.a0 = prior.a0;
  c.b0 = prior.b0;
  c.n_draws = n_draws;
  c.cpp = cpp_config();
  c.approach = approach;
  c.seed = seed;
  return c;
}

}  // namespace cpred
