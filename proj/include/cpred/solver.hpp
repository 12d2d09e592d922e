#pragma once

// The CPP objective J(a) = sum_i D(swapped_i(a), loo_i) and its minimizers.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cpred/conjugate.hpp"
#include "cpred/divergences.hpp"

namespace cpred {

struct CppProblem {
  Eigen::VectorXd m2;     // LOO means
  Eigen::VectorXd s2_sq;  // LOO variances
  Eigen::VectorXd c;      // swapped mean intercepts
  Eigen::VectorXd d;      // swapped mean slopes
  Eigen::VectorXd s1_sq;  // swapped variances
  DivergenceKind divergence;
  double map_prediction = 0.0;
  double sigma_hat = 1.0;

  Eigen::Index size() const { return m2.size(); }
  // Delta_i(a) = m2_i - (c_i + d_i a)
  double gap(Eigen::Index i, double a) const { return m2(i) - c(i) - d(i) * a; }
  // Shapes, positivity, finiteness; AllDZero when every d_i is zero.
  void validate() const;
};

enum class Summary { Mean, Median };

struct CppConfig {
  int grid_len = 61;
  double window_sd = 4.0;
  double refine_tol = 1e-8;
  Summary summary = Summary::Mean;
  // Winsorize sigma^2 draws at this upper quantile before solving.
  std::optional<double> truncate_quantile;

  void validate() const;
};

struct CppSolution {
  double a_star = 0.0;
  double objective_at_star = 0.0;
  bool converged = false;
  bool boundary = false;     // minimum on the (possibly doubled) window edge
  bool convexity_ok = false; // every |Delta_i(a*)| below its convexity radius
  double curvature = 0.0;    // central finite-difference J''(a*)
};

CppProblem assemble_problem(const std::vector<LooPredictive>& loo,
                            const std::vector<SwapCoefficients>& swap,
                            const DivergenceKind& divergence, double map_prediction,
                            double sigma_hat);

// Linear backend: scales the sigma^2-free terms.
CppProblem assemble_problem(const LinearTerms& terms, double sigma2,
                            const DivergenceKind& divergence, double sigma_hat);

// Every per-term divergence has the shape
//   D_i = base_i + w_i phi(kappa_i Delta_i^2),
// phi(u) = u for LogBC and phi(u) = -exp(-u) for Hellinger and DPD, so the
// objective (or an average of objectives over sigma^2 draws) is stored as
// pooled arrays.
class Objective {
 public:
  Objective() = default;
  explicit Objective(const CppProblem& prob, double weight = 1.0);

  // Appends the terms of another problem, each scaled by weight.
  void append(const CppProblem& prob, double weight);

  double value(double a) const;
  // Value without the a-independent base, used for finite differences.
  double variable_part(double a) const;
  double derivative(double a) const;
  double curvature(double a, double h) const;

  bool quadratic() const { return quadratic_; }
  // Exact minimizer; only for the quadratic (LogBC) family.
  double closed_form_minimizer() const;
  // Every |Delta_i(a)| strictly inside its convexity radius 1 / sqrt(2 kappa_i).
  bool convex_at(double a) const;

  Eigen::Index size() const { return r_.size(); }

 private:
  Eigen::ArrayXd r_;      // m2_i - c_i
  Eigen::ArrayXd d_;
  Eigen::ArrayXd w_;
  Eigen::ArrayXd kappa_;
  double base_ = 0.0;
  bool quadratic_ = false;
  bool initialized_ = false;
};

double objective_eval(const CppProblem& prob, double a);

CppSolution solve_logbc_closed_form(const CppProblem& prob);

// Grid over map_prediction +- window_sd * sigma_hat, then golden-section
// refinement inside the neighbouring grid cells.
CppSolution solve_1d(const CppProblem& prob, const CppConfig& cfg);

// Closed form for LogBC, solve_1d otherwise.
CppSolution solve(const CppProblem& prob, const CppConfig& cfg);

// Generic minimizer used by solve_1d and Approach II.
CppSolution minimize_objective(const Objective& obj, double center, double half_width,
                               const CppConfig& cfg);

using ProblemBuilder = std::function<CppProblem(double sigma2)>;

struct ApproachIResult {
  double a_hat = 0.0;
  std::vector<CppSolution> draw_solutions;
  std::size_t n_boundary = 0;   // draws excluded from the summary
  std::size_t n_nonconvex = 0;  // draws with convexity_ok == false
  bool all_boundary = false;    // every draw hit the edge; summary then uses all draws
  double sigma_hat = 0.0;       // posterior mean of sqrt(sigma^2) draws
};

// Draw-wise plug-in: solve once per sigma^2 draw, summarize the non-boundary
// solutions.  The search window uses the posterior mean of sigma over all
// draws.  Per-draw failures are rethrown as DrawError (lowest index first).
ApproachIResult solve_approach_I(const ProblemBuilder& build,
                                 const std::vector<double>& sigma2_draws, const CppConfig& cfg);
ApproachIResult solve_approach_I_serial(const ProblemBuilder& build,
                                        const std::vector<double>& sigma2_draws,
                                        const CppConfig& cfg);

// Posterior-averaged objective (1/B) sum_t J(a; sigma2_t).
CppSolution solve_approach_II(const ProblemBuilder& build,
                              const std::vector<double>& sigma2_draws, const CppConfig& cfg);

// Replaces draws above the q-quantile by that quantile (type 7).
std::vector<double> truncate_draws(const std::vector<double>& draws, double q);

double summarize(std::vector<double> values, Summary how);

}  // namespace cpred
