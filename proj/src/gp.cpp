#include "cpred/gp.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>

#include "cpred/errors.hpp"

namespace cpred {

namespace {

std::atomic<std::size_t> g_clamps{0};

double clamp_variance(double v) {
  if (v >= 0.0) return v;
  if (v < -1e-10) throw NotPositiveDefinite("GP predictive variance is negative");
  ++g_clamps;
  return 0.0;
}

Eigen::VectorXd drop(const Eigen::VectorXd& v, Eigen::Index i) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd out(n - 1);
  out.head(i) = v.head(i);
  out.tail(n - 1 - i) = v.tail(n - 1 - i);
  return out;
}

// Ingredients of the augmented system D_{-i} + {(x_new, a)} for predicting y_i.
struct SwapParts {
  double c = 0.0;
  double d = 0.0;
  double s1_sq = 0.0;
};

SwapParts swap_parts(const GpModel& m, Eigen::Index i, const Eigen::VectorXd& x_new) {
  const double mc = m.kernel().mean_const;
  const Eigen::VectorXd xi = m.X().row(i).transpose();
  const Eigen::VectorXd k_i = drop(m.cross_cov(xi), i);
  const Eigen::VectorXd k_plus = drop(m.cross_cov(x_new), i);
  const Eigen::VectorXd resid = drop(m.y(), i).array() - mc;

  const Eigen::VectorXd q = m.solve_without(i, k_i);
  const Eigen::VectorXd z = m.solve_without(i, k_plus);
  const double schur = m.kernel()(x_new, x_new) + m.noise() - k_plus.dot(z);
  if (!(schur > kLeverageGuard)) throw DegenerateAugmentation(static_cast<std::size_t>(i));
  const double k_plus_i = m.kernel()(x_new, xi);
  const double q_kp = q.dot(k_plus);

  // Mean at candidate a via the block inverse of the augmented covariance.
  const double base = mc + q.dot(resid);
  const double z_r = z.dot(resid);
  const double gain = (k_plus_i - q_kp) / schur;
  auto mean_at = [&](double a) { return base + gain * ((a - mc) - z_r); };

  SwapParts out;
  const double m0 = mean_at(0.0);
  const double m1 = mean_at(1.0);
  out.c = m0;
  out.d = m1 - m0;
  const double mm1 = mean_at(-1.0);
  if (std::abs(mm1 - (out.c - out.d)) > 1e-10 * (1.0 + std::abs(out.c) + std::abs(out.d))) {
    throw Error("GP swapped mean failed the collinearity probe");
  }
  const double explained = q.dot(k_i) + (q_kp - k_plus_i) * (q_kp - k_plus_i) / schur;
  out.s1_sq = clamp_variance(m.kernel()(xi, xi) - explained) + m.sigma2();
  return out;
}

}  // namespace

KernelSpec KernelSpec::squared_exponential(double lengthscale, double signal_var,
                                           double mean_const) {
  return {Kind::SquaredExponential, lengthscale, signal_var, mean_const};
}

KernelSpec KernelSpec::linear(double signal_var, double mean_const) {
  return {Kind::Linear, 1.0, signal_var, mean_const};
}

void KernelSpec::validate() const {
  if (!(signal_var > 0.0) || !std::isfinite(signal_var)) {
    throw InvalidInput("kernel signal variance must be positive");
  }
  if (kind == Kind::SquaredExponential && (!(lengthscale > 0.0) || !std::isfinite(lengthscale))) {
    throw InvalidInput("kernel lengthscale must be positive");
  }
  if (!std::isfinite(mean_const)) throw InvalidInput("kernel mean must be finite");
}

double KernelSpec::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const {
  if (kind == Kind::Linear) return signal_var * x.dot(xp);
  return signal_var * std::exp(-(x - xp).squaredNorm() / (2.0 * lengthscale * lengthscale));
}

KernelSpec::Kind parse_kernel_kind(const std::string& name) {
  if (name == "se" || name == "squared-exponential" || name == "rbf") {
    return KernelSpec::Kind::SquaredExponential;
  }
  if (name == "linear") return KernelSpec::Kind::Linear;
  throw InvalidInput("unknown kernel '" + name + "'");
}

GpModel::GpModel(Eigen::MatrixXd X, Eigen::VectorXd y, KernelSpec kernel, double sigma2)
    : X_(std::move(X)), y_(std::move(y)), kernel_(kernel), sigma2_(sigma2) {
  kernel_.validate();
  if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) throw InvalidInput("sigma2 must be positive");
  if (X_.rows() < 2 || X_.rows() != y_.size()) throw InvalidInput("GP needs n >= 2 matching rows");
  if (!X_.allFinite() || !y_.allFinite()) throw InvalidInput("GP data has non-finite entries");

  const Eigen::Index n = X_.rows();
  noise_ = sigma2_ + 1e-10 * kernel_.signal_var;
  Sigma_.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) {
      Sigma_(r, c) = Sigma_(c, r) = kernel_(X_.row(r).transpose(), X_.row(c).transpose());
    }
  }
  Sigma_.diagonal().array() += noise_;
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma_);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("GP covariance is not positive definite");
  Sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Sigma_inv_ = 0.5 * (Sigma_inv_ + Sigma_inv_.transpose());
  weights_ = llt.solve((y_.array() - kernel_.mean_const).matrix());
}

Eigen::VectorXd GpModel::cross_cov(const Eigen::VectorXd& x) const {
  Eigen::VectorXd k(n());
  for (Eigen::Index r = 0; r < n(); ++r) k(r) = kernel_(X_.row(r).transpose(), x);
  return k;
}

Eigen::VectorXd GpModel::solve_without(Eigen::Index i, const Eigen::VectorXd& v) const {
  const double pii = Sigma_inv_(i, i);
  if (!(pii > 1e-14)) throw DegenerateLoo(static_cast<std::size_t>(i));
  const Eigen::Index n = this->n();
  // Embed v with a zero at position i; then Sigma_{-i}^{-1} v equals
  // (P - P e_i e_i' P / P_ii) applied to the embedded vector, with row i dropped.
  Eigen::VectorXd full(n);
  full.head(i) = v.head(i);
  full(i) = 0.0;
  full.tail(n - 1 - i) = v.tail(n - 1 - i);
  const Eigen::VectorXd Pv = Sigma_inv_ * full;
  const Eigen::VectorXd res = Pv - Sigma_inv_.col(i) * (Pv(i) / pii);
  return drop(res, i);
}

GaussianLaw gp_predictive(const GpModel& model, const Eigen::VectorXd& x_star) {
  if (x_star.size() != model.X().cols()) throw InvalidInput("x_star has the wrong dimension");
  const Eigen::VectorXd k = model.cross_cov(x_star);
  const double mean = model.kernel().mean_const + k.dot(model.weights());
  const double v = model.kernel()(x_star, x_star) - k.dot(model.Sigma_n_inv() * k);
  return {mean, clamp_variance(v) + model.sigma2()};
}

LooPredictive gp_loo_predictive(const GpModel& model, Eigen::Index i) {
  if (i < 0 || i >= model.n()) throw InvalidInput("observation index out of range");
  const double pii = model.Sigma_n_inv()(i, i);
  if (!(pii > 1e-14)) throw DegenerateLoo(static_cast<std::size_t>(i));
  return {model.y()(i) - model.weights()(i) / pii, 1.0 / pii};
}

SwapCoefficients gp_swap_coefficients(const GpModel& model, Eigen::Index i,
                                      const Eigen::VectorXd& x_new) {
  if (i < 0 || i >= model.n()) throw InvalidInput("observation index out of range");
  if (x_new.size() != model.X().cols()) throw InvalidInput("x_new has the wrong dimension");
  const SwapParts p = swap_parts(model, i, x_new);
  SwapCoefficients out;
  out.c = p.c;
  out.d = p.d;
  out.s1_sq = p.s1_sq;
  out.delta_lev = p.s1_sq / model.sigma2() - 1.0;
  return out;
}

double gp_swapped_mean(const GpModel& model, Eigen::Index i, const Eigen::VectorXd& x_new,
                       double a) {
  // Direct refit on the augmented data; used as an independent check.
  Eigen::MatrixXd X = model.X();
  Eigen::VectorXd y = model.y();
  X.row(i) = x_new.transpose();
  y(i) = a;
  // The swapped point now sits at index i; predict y_i at the original x_i.
  const GpModel aug(X, y, model.kernel(), model.sigma2());
  return gp_predictive(aug, model.X().row(i).transpose()).mean;
}

CppProblem gp_problem(const GpModel& model, const Eigen::VectorXd& x_new,
                      const DivergenceKind& divergence, double sigma_hat) {
  const auto n = static_cast<std::size_t>(model.n());
  std::vector<LooPredictive> loo(n);
  std::vector<SwapCoefficients> swap(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      loo[static_cast<std::size_t>(i)] = gp_loo_predictive(model, i);
      swap[static_cast<std::size_t>(i)] = gp_swap_coefficients(model, i, x_new);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return assemble_problem(loo, swap, divergence, gp_predictive(model, x_new).mean, sigma_hat);
}

std::size_t gp_clamp_events() { return g_clamps.load(); }

}  // namespace cpred
