#include "cpred/conjugate.hpp"

#include <cmath>
#include <string>

#include "cpred/errors.hpp"

namespace cpred {

namespace {

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

MatrixXd spd_inverse(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) + " is not symmetric positive definite");
  }
  return llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

struct FastSwap {
  double m2, c, d, delta, loo_scale;
};

// x_i'B_i x_new, x_new'B_i x_new etc. expressed through u = A^{-1} x_i and
// w = A^{-1} x_new:
//   B_i          = A^{-1} + u u' / (1 - l)
//   x_i'B_i x_i  = l / (1 - l)
//   x_i'B_i xn   = (u'xn) / (1 - l)
//   xn'B_i xn    = xn'w + (u'xn)^2 / (1 - l)
//   (A^{(+)})^{-1} = B_i - B_i xn xn' B_i / gamma,  gamma = 1 + xn'B_i xn
FastSwap fast_swap(double lev, double fitted_i, double y_i, double ux, double map_new,
                   double xn_w, Index i) {
  const double one_minus = 1.0 - lev;
  if (!(one_minus > kLeverageGuard)) throw DegenerateLeverage(static_cast<std::size_t>(i));
  const double xi_b_xn = ux / one_minus;
  const double gamma = 1.0 + xn_w + ux * ux / one_minus;
  if (!(gamma > kLeverageGuard)) throw DegenerateAugmentation(static_cast<std::size_t>(i));

  FastSwap out;
  out.loo_scale = 1.0 / one_minus;
  out.m2 = (fitted_i - lev * y_i) / one_minus;
  out.d = xi_b_xn / gamma;
  out.delta = lev / one_minus - xi_b_xn * xi_b_xn / gamma;
  // xn' B_i (b - x_i y_i) is the leave-one-out prediction at x_new.
  const double loo_at_new = map_new - ux * (y_i - fitted_i) / one_minus;
  out.c = out.m2 - out.d * loo_at_new;
  return out;
}

template <bool Parallel>
LinearTerms swap_all_impl(const PosteriorState& state, const Dataset& data,
                          const VectorXd& x_new) {
  const Index n = data.n();
  if (x_new.size() != data.p()) throw InvalidInput("x_new has the wrong dimension");
  LinearTerms t;
  t.m2.resize(n);
  t.loo_scale.resize(n);
  t.c.resize(n);
  t.d.resize(n);
  t.swap_scale.resize(n);
  const VectorXd w = state.Ainv * x_new;
  const double xn_w = x_new.dot(w);
  t.map_prediction = state.map_mean(x_new);
  t.map_leverage = xn_w;
  const VectorXd ux = state.U * x_new;

  // Exceptions cannot leave an OpenMP region; remember the first bad index.
  long long bad_leverage = -1;
  long long bad_augment = -1;
#pragma omp parallel for schedule(static) if (Parallel)
  for (Index i = 0; i < n; ++i) {
    try {
      const FastSwap s = fast_swap(state.leverages(i), state.fitted(i), data.y(i), ux(i),
                                   t.map_prediction, xn_w, i);
      t.m2(i) = s.m2;
      t.loo_scale(i) = s.loo_scale;
      t.c(i) = s.c;
      t.d(i) = s.d;
      t.swap_scale(i) = 1.0 + s.delta;
    } catch (const DegenerateLeverage&) {
#pragma omp critical(cpred_swap_error)
      if (bad_leverage < 0 || i < bad_leverage) bad_leverage = i;
    } catch (const DegenerateAugmentation&) {
#pragma omp critical(cpred_swap_error)
      if (bad_augment < 0 || i < bad_augment) bad_augment = i;
    }
  }
  if (bad_leverage >= 0) throw DegenerateLeverage(static_cast<std::size_t>(bad_leverage));
  if (bad_augment >= 0) throw DegenerateAugmentation(static_cast<std::size_t>(bad_augment));
  return t;
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() < 2) throw InvalidInput("dataset needs at least two observations");
  if (X.cols() < 1) throw InvalidInput("dataset needs at least one covariate");
  if (y.size() != X.rows()) throw InvalidInput("X and y row counts differ");
  if (!all_finite(X) || !y.allFinite()) throw InvalidInput("dataset has non-finite entries");
}

Dataset Dataset::without_row(Index i) const {
  Dataset out;
  const Index n = this->n();
  out.X.resize(n - 1, p());
  out.y.resize(n - 1);
  for (Index r = 0, k = 0; r < n; ++r) {
    if (r == i) continue;
    out.X.row(k) = X.row(r);
    out.y(k) = y(r);
    ++k;
  }
  return out;
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.X.resize(static_cast<Index>(rows.size()), p());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.X.row(static_cast<Index>(k)) = X.row(rows[k]);
    out.y(static_cast<Index>(k)) = y(rows[k]);
  }
  return out;
}

PriorSpec PriorSpec::isotropic(Index p, double v_scale, double beta0) {
  PriorSpec prior;
  prior.beta0 = VectorXd::Constant(p, beta0);
  prior.V = v_scale * MatrixXd::Identity(p, p);
  return prior;
}

void PriorSpec::validate(Index p) const {
  if (beta0.size() != p || V.rows() != p || V.cols() != p) {
    throw InvalidInput("prior dimensions do not match the design");
  }
  if (!V.isApprox(V.transpose(), 1e-12)) throw NotPositiveDefinite("V is not symmetric");
  if (sigma2 && !(*sigma2 > 0.0 && std::isfinite(*sigma2))) {
    throw InvalidInput("sigma2 must be positive");
  }
}

PosteriorState fit_posterior(const Dataset& data, const PriorSpec& prior) {
  data.validate();
  prior.validate(data.p());

  PosteriorState s;
  s.Vinv = spd_inverse(prior.V, "prior scale V");
  s.A = data.X.transpose() * data.X + s.Vinv;
  s.A = 0.5 * (s.A + s.A.transpose());
  s.chol.compute(s.A);
  if (s.chol.info() != Eigen::Success) throw NotPositiveDefinite("A = X'X + V^{-1} is singular");
  s.Ainv = s.chol.solve(MatrixXd::Identity(data.p(), data.p()));
  s.Ainv = 0.5 * (s.Ainv + s.Ainv.transpose());
  s.b = data.X.transpose() * data.y + s.Vinv * prior.beta0;
  s.beta_hat = s.chol.solve(s.b);
  s.U = data.X * s.Ainv;
  s.leverages = (s.U.array() * data.X.array()).rowwise().sum();
  s.fitted = data.X * s.beta_hat;
  for (Index i = 0; i < data.n(); ++i) {
    if (!(1.0 - s.leverages(i) > kLeverageGuard)) {
      throw DegenerateLeverage(static_cast<std::size_t>(i));
    }
  }
  return s;
}

LooPredictive loo_predictive(const PosteriorState& state, const Dataset& data, Index i,
                             double sigma2) {
  if (i < 0 || i >= data.n()) throw InvalidInput("observation index out of range");
  const double lev = state.leverages(i);
  const double one_minus = 1.0 - lev;
  if (!(one_minus > kLeverageGuard)) throw DegenerateLeverage(static_cast<std::size_t>(i));
  return {(state.fitted(i) - lev * data.y(i)) / one_minus, sigma2 / one_minus};
}

SwapCoefficients swap_coefficients_naive(const Dataset& data, const PriorSpec& prior, Index i,
                                         const VectorXd& x_new, double sigma2) {
  if (i < 0 || i >= data.n()) throw InvalidInput("observation index out of range");
  if (x_new.size() != data.p()) throw InvalidInput("x_new has the wrong dimension");
  const VectorXd xi = data.X.row(i).transpose();
  const MatrixXd Vinv = spd_inverse(prior.V, "prior scale V");

  MatrixXd A_plus = data.X.transpose() * data.X - xi * xi.transpose() +
                    x_new * x_new.transpose() + Vinv;
  Eigen::FullPivLU<MatrixXd> lu(A_plus);
  if (!lu.isInvertible()) throw NotPositiveDefinite("augmented matrix is singular");
  const MatrixXd A_plus_inv = lu.inverse();

  const VectorXd rhs = data.X.transpose() * data.y - xi * data.y(i) + Vinv * prior.beta0;
  SwapCoefficients out;
  out.c = xi.dot(A_plus_inv * rhs);
  out.d = xi.dot(A_plus_inv * x_new);
  out.delta_lev = xi.dot(A_plus_inv * xi);
  out.s1_sq = sigma2 * (1.0 + out.delta_lev);
  return out;
}

SwapCoefficients swap_coefficients_fast(const PosteriorState& state, const Dataset& data, Index i,
                                        const VectorXd& x_new, double sigma2) {
  if (i < 0 || i >= data.n()) throw InvalidInput("observation index out of range");
  if (x_new.size() != data.p()) throw InvalidInput("x_new has the wrong dimension");
  const VectorXd w = state.Ainv * x_new;
  const double ux = state.U.row(i).dot(x_new);
  const FastSwap s = fast_swap(state.leverages(i), state.fitted(i), data.y(i), ux,
                               state.map_mean(x_new), x_new.dot(w), i);
  SwapCoefficients out;
  out.c = s.c;
  out.d = s.d;
  out.delta_lev = s.delta;
  out.s1_sq = sigma2 * (1.0 + s.delta);
  return out;
}

LinearTerms swap_all(const PosteriorState& state, const Dataset& data, const VectorXd& x_new) {
  return swap_all_impl<true>(state, data, x_new);
}

LinearTerms swap_all_serial(const PosteriorState& state, const Dataset& data,
                            const VectorXd& x_new) {
  return swap_all_impl<false>(state, data, x_new);
}

LinearTerms swap_all_naive(const Dataset& data, const PriorSpec& prior, const VectorXd& x_new) {
  const PosteriorState state = fit_posterior(data, prior);
  const Index n = data.n();
  LinearTerms t;
  t.m2.resize(n);
  t.loo_scale.resize(n);
  t.c.resize(n);
  t.d.resize(n);
  t.swap_scale.resize(n);
  t.map_prediction = state.map_mean(x_new);
  t.map_leverage = state.leverage_at(x_new);
  for (Index i = 0; i < n; ++i) {
    const LooPredictive loo = loo_predictive(state, data, i, 1.0);
    const SwapCoefficients sw = swap_coefficients_naive(data, prior, i, x_new, 1.0);
    t.m2(i) = loo.m2;
    t.loo_scale(i) = loo.s2_sq;
    t.c(i) = sw.c;
    t.d(i) = sw.d;
    t.swap_scale(i) = sw.s1_sq;
  }
  return t;
}

}  // namespace cpred
