#pragma once

// Gaussian-process regression backend with the same LOO / swap contracts as
// the conjugate model.  y = f(x) + e, f ~ GP(m, k), e ~ N(0, sigma^2).

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpred/conjugate.hpp"
#include "cpred/divergences.hpp"
#include "cpred/solver.hpp"

namespace cpred {

struct KernelSpec {
  enum class Kind { SquaredExponential, Linear };

  Kind kind = Kind::SquaredExponential;
  double lengthscale = 1.0;  // squared-exponential only
  double signal_var = 1.0;
  double mean_const = 0.0;

  static KernelSpec squared_exponential(double lengthscale, double signal_var,
                                        double mean_const = 0.0);
  static KernelSpec linear(double signal_var, double mean_const = 0.0);

  void validate() const;
  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const;
};

KernelSpec::Kind parse_kernel_kind(const std::string& name);

class GpModel {
 public:
  // Factorizes Sigma_n = K_n + (sigma2 + jitter) I with jitter = 1e-10 * signal_var.
  GpModel(Eigen::MatrixXd X, Eigen::VectorXd y, KernelSpec kernel, double sigma2);

  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& Sigma_n() const { return Sigma_; }
  const Eigen::MatrixXd& Sigma_n_inv() const { return Sigma_inv_; }
  const KernelSpec& kernel() const { return kernel_; }
  double sigma2() const { return sigma2_; }
  double noise() const { return noise_; }  // sigma2 plus jitter
  Eigen::Index n() const { return X_.rows(); }

  // Sigma_n^{-1} (y - m)
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd cross_cov(const Eigen::VectorXd& x) const;

  // Solves Sigma_{-i} u = v for v indexed by the n-1 remaining points, via
  // the block inverse of Sigma_n^{-1}.
  Eigen::VectorXd solve_without(Eigen::Index i, const Eigen::VectorXd& v) const;

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  KernelSpec kernel_;
  double sigma2_;
  double noise_;
  Eigen::MatrixXd Sigma_;
  Eigen::MatrixXd Sigma_inv_;
  Eigen::VectorXd weights_;
};

// Variance v_n(x) + sigma^2; negative v_n within 1e-10 is clamped to zero.
GaussianLaw gp_predictive(const GpModel& model, const Eigen::VectorXd& x_star);

LooPredictive gp_loo_predictive(const GpModel& model, Eigen::Index i);

// Swapped mean of y_i after replacing (x_i, y_i) by (x_new, a), recovered
// from probes at a = 0 and a = 1 and checked for collinearity at a = -1.
SwapCoefficients gp_swap_coefficients(const GpModel& model, Eigen::Index i,
                                      const Eigen::VectorXd& x_new);

// Swapped predictive mean of y_i at a single candidate value a.
double gp_swapped_mean(const GpModel& model, Eigen::Index i, const Eigen::VectorXd& x_new,
                       double a);

CppProblem gp_problem(const GpModel& model, const Eigen::VectorXd& x_new,
                      const DivergenceKind& divergence, double sigma_hat);

// Number of predictive-variance clamp events since program start.
std::size_t gp_clamp_events();

}  // namespace cpred
