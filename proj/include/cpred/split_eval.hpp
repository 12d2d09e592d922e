#pragma once

#include <cstdint>
#include <vector>

#include "cpred/conjugate.hpp"
#include "cpred/divergences.hpp"
#include "cpred/lab.hpp"
#include "cpred/solver.hpp"
#include "cpred/splits.hpp"

namespace cpred {

struct SplitEvalConfig {
  DivergenceKind divergence = DivergenceKind::dpd(1.0);
  double v_scale = 100.0;
  double a0 = 0.1;
  double b0 = 0.1;
  std::size_t n_draws = 500;
  CppConfig cpp;
  Approach approach = Approach::I;
  std::uint64_t seed = 1;
};

struct SplitRecord {
  int split = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double mlpd = 0.0;
  double gain_clean = 0.0;    // mean gain over clean test rows in this split
  double gain_outlier = 0.0;  // mean gain over outlier test rows (0 when none)
};

struct ObservationGain {
  int split = 0;
  Eigen::Index row = 0;  // 0-based row of the evaluated dataset
  bool outlier = false;
  double y = 0.0;        // standardized response
  double a_star = 0.0;
  double map_pred = 0.0;
  double pred_var = 0.0;
  double gain = 0.0;
};

struct SplitEvalReport {
  std::vector<SplitRecord> splits;
  std::vector<ObservationGain> observations;
  double mean_mlpd = 0.0;
  double se = 0.0;
  int n_positive = 0;
  double gain_clean = 0.0;    // pooled over all clean test observations
  double gain_outlier = 0.0;  // pooled over all outlier test observations
  std::size_t n_clean_obs = 0;
  std::size_t n_outlier_obs = 0;
};

// Per split: covariates and response standardized with training statistics,
// posterior fitted on the training rows, CPP and MAP compared on the test rows.
SplitEvalReport split_eval(const Dataset& data, const SplitPlan& plan, const SplitEvalConfig& cfg);

}  // namespace cpred
