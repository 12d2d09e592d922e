#pragma once

// Conjugate Gaussian linear model
//
//   y | beta ~ N(X beta, sigma^2 I),   beta ~ N(beta0, sigma^2 V)
//
// with A = X'X + V^{-1}, b = X'y + V^{-1} beta0 and beta_hat = A^{-1} b.
// Leave-one-out predictives come from a single Sherman-Morrison step on
// A^{-1}; swapped predictives (row i replaced by the candidate x_new) from
// two sequential rank-one steps.  Everything here is sigma^2-free except
// the variances, which scale linearly in sigma^2.

#include <optional>

#include <Eigen/Dense>

namespace cpred {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// 1 - l_i below this is treated as a degenerate leverage.
inline constexpr double kLeverageGuard = 1e-12;

struct Dataset {
  MatrixXd X;  // n x p, rows are covariate vectors
  VectorXd y;  // n

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  // Throws InvalidInput unless n >= 2, p >= 1, shapes agree and all entries are finite.
  void validate() const;

  Dataset without_row(Index i) const;
  Dataset subset(const std::vector<Index>& rows) const;
};

struct PriorSpec {
  VectorXd beta0;                // prior mean
  MatrixXd V;                    // prior scale; Cov(beta) = sigma^2 V
  std::optional<double> sigma2;  // known noise variance, absent in unknown-variance mode

  // beta ~ N(beta0 * 1, sigma^2 * v_scale * I)
  static PriorSpec isotropic(Index p, double v_scale = 100.0, double beta0 = 0.0);

  void validate(Index p) const;
};

struct PosteriorState {
  MatrixXd A;     // X'X + V^{-1}
  MatrixXd Ainv;
  MatrixXd Vinv;
  VectorXd b;         // X'y + V^{-1} beta0
  VectorXd beta_hat;  // A^{-1} b
  VectorXd leverages; // l_i = x_i' A^{-1} x_i
  VectorXd fitted;    // x_i' beta_hat
  MatrixXd U;         // row i holds (A^{-1} x_i)'
  Eigen::LLT<MatrixXd> chol;

  Index n() const { return U.rows(); }
  Index p() const { return A.rows(); }

  // Plug-in (MAP) prediction x' beta_hat.
  double map_mean(const VectorXd& x) const { return x.dot(beta_hat); }
  // x' A^{-1} x, so the plug-in predictive variance is sigma^2 (1 + leverage).
  double leverage_at(const VectorXd& x) const { return x.dot(Ainv * x); }
};

// Throws NotPositiveDefinite (V or A), DegenerateLeverage.
PosteriorState fit_posterior(const Dataset& data, const PriorSpec& prior);

struct LooPredictive {
  double m2;     // E(y_i | y_{-i})
  double s2_sq;  // sigma^2 / (1 - l_i)
};

LooPredictive loo_predictive(const PosteriorState& state, const Dataset& data, Index i,
                             double sigma2);

struct SwapCoefficients {
  double c = 0.0;          // intercept of the swapped mean
  double d = 0.0;          // slope of the swapped mean in the candidate value a
  double s1_sq = 0.0;      // sigma^2 (1 + delta_lev)
  double delta_lev = 0.0;  // x_i' (A_{-i}^{(+)})^{-1} x_i

  double mean(double a) const { return c + d * a; }
};

// Reference path: forms A_{-i}^{(+)} = A - x_i x_i' + x_new x_new' from the
// raw data and inverts it.  O(p^3) per observation.
SwapCoefficients swap_coefficients_naive(const Dataset& data, const PriorSpec& prior, Index i,
                                         const VectorXd& x_new, double sigma2);

// Two Sherman-Morrison steps on A^{-1}: remove x_i, then add x_new.  O(p^2)
// per observation, O(p) once A^{-1} x_i and A^{-1} x_new are known.
SwapCoefficients swap_coefficients_fast(const PosteriorState& state, const Dataset& data, Index i,
                                        const VectorXd& x_new, double sigma2);

// All per-observation quantities the CPP objective needs for one candidate
// covariate, with sigma^2 factored out:
//   s2_i^2 = sigma^2 loo_scale_i,  s1_i^2 = sigma^2 swap_scale_i.
struct LinearTerms {
  VectorXd m2;          // LOO means
  VectorXd loo_scale;   // 1 / (1 - l_i)
  VectorXd c;
  VectorXd d;
  VectorXd swap_scale;  // 1 + delta_i
  double map_prediction = 0.0;
  double map_leverage = 0.0;  // x_new' A^{-1} x_new

  Index size() const { return m2.size(); }
};

// Fast path for every i, parallel over observations.
LinearTerms swap_all(const PosteriorState& state, const Dataset& data, const VectorXd& x_new);
// Serial twin of swap_all, kept as the reference for the parallel kernel.
LinearTerms swap_all_serial(const PosteriorState& state, const Dataset& data,
                            const VectorXd& x_new);
// Naive O(n p^3) path for every i.
LinearTerms swap_all_naive(const Dataset& data, const PriorSpec& prior, const VectorXd& x_new);

}  // namespace cpred
