#pragma once

// Monte Carlo laboratory: clean data generation, response contamination,
// MLPD evaluation, scenario runner and influence probes.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpred/conjugate.hpp"
#include "cpred/divergences.hpp"
#include "cpred/solver.hpp"
#include "cpred/standardize.hpp"

namespace cpred {

enum class Approach { I, II };

struct SimScenario {
  Eigen::Index n = 200;
  Eigen::Index p = 6;
  double sigma = 1.0;
  Eigen::VectorXd beta_true;  // empty: (1, -1, 0.5, 0, ..., 0)
  double outlier_frac = 0.03;
  double outlier_scale = 10.0;  // perturbation sd in units of sigma
  int n_replicates = 50;
  DivergenceKind divergence = DivergenceKind::dpd(1.0);
  std::uint64_t seed = 20240611;
  Eigen::Index n_test = 50;
  std::size_t n_draws = 500;
  double a0 = 0.1;
  double b0 = 0.1;
  double v_scale = 100.0;
  Approach approach = Approach::I;
  CppConfig cpp;

  Eigen::VectorXd beta() const;
  void validate() const;
};

struct ContaminationSpec {
  double frac = 0.0;
  double perturb_sd = 10.0;
};

struct GeneratedData {
  Dataset train;
  Dataset test;  // clean draws from the same model
};

struct ContaminatedData {
  Dataset data;                    // perturbed responses, standardized covariates
  std::vector<Eigen::Index> perturbed;  // sorted indices of perturbed responses
  Standardizer transform;          // fitted on the training covariates
};

// Derives the seed of stream `stream` in replicate `index` from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

GeneratedData generate_data(const SimScenario& scenario, std::uint64_t replicate_seed);

// floor(frac * n) responses get N(0, perturb_sd^2) added, then the covariate
// columns are standardized.
ContaminatedData contaminate(const Dataset& data, const ContaminationSpec& spec,
                             std::uint64_t seed);

double log_normal_density(double y, const GaussianLaw& law);

// n_test^{-1} sum {log p_cpp(y) - log p_map(y)}.
double mlpd(const Eigen::VectorXd& test_y, const std::vector<GaussianLaw>& cpp,
            const std::vector<GaussianLaw>& map);

// Per-test-point record of a replicate.
struct PointRecord {
  double y = 0.0;          // observed test response
  double truth = 0.0;      // noise-free mean x'beta_true
  double a_star = 0.0;     // CPP prediction
  double map_pred = 0.0;   // plug-in prediction
  double pred_var = 0.0;   // shared predictive variance
  double gain = 0.0;       // log p_cpp(y) - log p_map(y)
};

struct ReplicateResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double mlpd = 0.0;
  bool cpp_positive = false;
  double a_star = 0.0;      // mean CPP prediction over test points
  double map_pred = 0.0;    // mean plug-in prediction over test points
  double mean_abs_shift = 0.0;  // mean |a* - MAP| / sigma_hat
  double sigma_hat = 0.0;
  std::size_t n_perturbed = 0;
  std::size_t boundary_draws = 0;
  std::size_t nonconvex_draws = 0;
  std::vector<PointRecord> points;
};

struct ScenarioSummary {
  double mean_mlpd = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double pct_positive = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  std::vector<ReplicateResult> replicates;
};

ReplicateResult run_replicate(const SimScenario& scenario, int index);

ScenarioSummary summarize_replicates(std::vector<ReplicateResult> reps);

// Replicates run concurrently; the result does not depend on thread count.
ScenarioSummary run_scenario(const SimScenario& scenario);
ScenarioSummary run_scenario_serial(const SimScenario& scenario);

// CPP prediction at x_new for a fitted dataset with sigma^2 draws.
struct CppPrediction {
  double a_star = 0.0;
  double map_pred = 0.0;
  double pred_var = 0.0;  // mean(sigma^2) (1 + x'A^{-1}x)
  double sigma_hat = 0.0;
  std::size_t boundary_draws = 0;
  std::size_t nonconvex_draws = 0;
};

CppPrediction predict_unknown_variance(const PosteriorState& state, const Dataset& data,
                                       const Eigen::VectorXd& x_new,
                                       const std::vector<double>& sigma2_draws,
                                       const DivergenceKind& divergence, const CppConfig& cfg,
                                       Approach approach = Approach::I);

CppPrediction predict_known_variance(const PosteriorState& state, const Dataset& data,
                                     const Eigen::VectorXd& x_new, double sigma2,
                                     const DivergenceKind& divergence, const CppConfig& cfg);

struct SweepPoint {
  double magnitude = 0.0;
  double a_star = 0.0;
  double map_pred = 0.0;
  bool boundary = false;
};

struct SweepResult {
  std::vector<SweepPoint> trajectory;
  double cpp_range = 0.0;
  double map_range = 0.0;
  double sigma_hat = 0.0;
  double analytic_slope = 0.0;   // x_new' A^{-1} x_j
  double max_slope_error = 0.0;  // worst |empirical MAP slope - analytic|
};

// Replaces y_j by each magnitude (known sigma^2 from prior.sigma2) and
// re-solves CPP and MAP.
SweepResult influence_sweep(const Dataset& data, const PriorSpec& prior,
                            const Eigen::VectorXd& x_new, Eigen::Index j,
                            const std::vector<double>& magnitudes,
                            const DivergenceKind& divergence, const CppConfig& cfg);

// Expected log predictive density of CPP minus MAP under the clean model,
// [(m0 - map)^2 - (m0 - a*)^2] / (2 v), averaged over test points.
double elpd_difference(const std::vector<PointRecord>& points);

struct ElpdProbeResult {
  double contaminated = 0.0;  // mean ELPD difference at the scenario's epsilon
  double clean = 0.0;         // same seeds with epsilon = 0
  double difference = 0.0;    // contaminated - clean
  double se = 0.0;            // SE of the paired per-replicate differences
  double mlpd_contaminated = 0.0;
  std::size_t n_ok = 0;
};

ElpdProbeResult elpd_probe(const SimScenario& scenario);

}  // namespace cpred
