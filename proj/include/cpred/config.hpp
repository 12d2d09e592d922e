#pragma once

// Run configuration shared by every CLI command.  The JSON form mirrors the
// field names below; unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpred/basis.hpp"
#include "cpred/divergences.hpp"
#include "cpred/gp.hpp"
#include "cpred/lab.hpp"
#include "cpred/solver.hpp"
#include "cpred/split_eval.hpp"

namespace cpred {

enum class Backend { Linear, Basis, Gp };

struct PriorConfig {
  double beta0 = 0.0;
  double v_scale = 100.0;
  double a0 = 0.1;
  double b0 = 0.1;
  std::optional<double> sigma2;  // known noise variance; absent means sample it
};

struct SimulateConfig {
  Eigen::Index n = 200;
  Eigen::Index p = 6;
  double sigma = 1.0;
  std::vector<double> beta_true;  // empty: default pattern
  double outlier_frac = 0.03;
  double outlier_scale = 10.0;
  int n_replicates = 50;
  Eigen::Index n_test = 50;
};

struct SplitEvalSection {
  int n_splits = 10;
  Eigen::Index n_clean_test = 18;
  std::string outliers = "iqr";  // "iqr", "studentized" or 1-based list
  std::string missing = "reject";
};

struct RunConfig {
  std::string command;  // optional in JSON; must match the CLI subcommand when set
  std::uint64_t seed = 20240611;
  DivergenceKind divergence = DivergenceKind::dpd(1.0);
  PriorConfig prior;
  std::size_t n_draws = 500;
  int grid_len = 61;
  double window_sd = 4.0;
  double refine_tol = 1e-8;
  Summary summary = Summary::Mean;
  std::optional<double> truncate_quantile;
  Approach approach = Approach::I;
  Backend backend = Backend::Linear;
  BasisSpec basis = BasisSpec::polynomial(2);
  KernelSpec kernel = KernelSpec::squared_exponential(1.0, 1.0);
  SimulateConfig simulate;
  SplitEvalSection split_eval;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text(int indent = 2) const;

  // CPP_SEED, when set, replaces the seed.  Returns true if it did.
  bool apply_env_seed();
  void validate() const;

  CppConfig cpp_config() const;
  SimScenario scenario() const;
  SplitEvalConfig split_eval_config() const;
};

std::string backend_name(Backend b);
Backend parse_backend(const std::string& name);

}  // namespace cpred
