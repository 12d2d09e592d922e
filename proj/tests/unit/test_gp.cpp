#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cpred/conjugate.hpp"
#include "cpred/errors.hpp"
#include "cpred/gp.hpp"
#include "oracles.hpp"

using namespace cpred;

namespace {

MatrixXd drop_row(const MatrixXd& X, Index i) {
  Dataset d{X, VectorXd::Zero(X.rows())};
  return d.without_row(i).X;
}

VectorXd drop_entry(const VectorXd& y, Index i) {
  Dataset d{MatrixXd::Zero(y.size(), 1), y};
  return d.without_row(i).y;
}

// Linear kernel v * x'x' against beta ~ N(0, sigma2 * V), V = (v / sigma2) I.
struct Dual {
  Dataset data;
  PriorSpec prior;
  KernelSpec kernel;
  double sigma2;
};

Dual dual_instance(oracle::Gen& g, Index n, Index p) {
  Dual d;
  d.data = g.dataset(n, p);
  d.sigma2 = g.uniform(0.3, 2.0);
  const double v_scale = g.uniform(0.5, 10.0);
  d.prior = PriorSpec::isotropic(p, v_scale);
  d.kernel = KernelSpec::linear(d.sigma2 * v_scale);
  return d;
}

}  // namespace

TEST_CASE("kernel parsing and validation") {
  CHECK(parse_kernel_kind("rbf") == KernelSpec::Kind::SquaredExponential);
  CHECK(parse_kernel_kind("linear") == KernelSpec::Kind::Linear);
  CHECK_THROWS_AS(parse_kernel_kind("matern"), InvalidInput);
  CHECK_THROWS_AS(KernelSpec::squared_exponential(0.0, 1.0).validate(), InvalidInput);
  CHECK_THROWS_AS(KernelSpec::linear(-1.0).validate(), InvalidInput);
  CHECK_THROWS_AS(GpModel(MatrixXd::Ones(3, 1), VectorXd::Ones(3), KernelSpec::linear(1.0), 0.0), InvalidInput);
}

TEST_CASE("vanishing kernel returns the prior mean and noise variance") {
  oracle::Gen g(1);
  const Dataset d = g.dataset(10, 2);
  const GpModel m(d.X, d.y, KernelSpec::squared_exponential(1.0, 1e-12, 0.7), 0.5);
  const GaussianLaw law = gp_predictive(m, g.normal_vector(2));
  CHECK(law.mean == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(law.var == doctest::Approx(0.5).epsilon(1e-9));

  const GpModel two(d.X.topRows(2), d.y.head(2), KernelSpec::squared_exponential(1.0, 1e-12, -0.3), 0.8);
  for (Index i = 0; i < 2; ++i) {
    const LooPredictive l = gp_loo_predictive(two, i);
    CHECK(l.m2 == doctest::Approx(-0.3).epsilon(1e-9));
    CHECK(l.s2_sq == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(std::abs(gp_swap_coefficients(two, i, g.normal_vector(2)).d) < 1e-10);
  }
}

TEST_CASE("near-noiseless interpolation") {
  oracle::Gen g(2);
  const MatrixXd X = g.normal_matrix(8, 2);
  const VectorXd y = g.normal_vector(8);
  const GpModel m(X, y, KernelSpec::squared_exponential(0.8, 1.0), 1e-10);
  for (Index i = 0; i < 8; ++i) {
    CHECK(std::abs(gp_predictive(m, X.row(i).transpose()).mean - y(i)) < 1e-4);
  }
}

TEST_CASE("linear kernel matches the conjugate model") {
  oracle::Gen g(3);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Dual d = dual_instance(g, 25, 3);
    const PosteriorState st = fit_posterior(d.data, d.prior);
    const GpModel m(d.data.X, d.data.y, d.kernel, d.sigma2);
    const VectorXd xs = g.normal_vector(3);
    const GaussianLaw law = gp_predictive(m, xs);
    worst = std::max(worst, std::abs(law.mean - st.map_mean(xs)));
    worst = std::max(worst, std::abs(law.var - d.sigma2 * (1.0 + st.leverage_at(xs))));
    for (Index i = 0; i < d.data.n(); ++i) {
      const LooPredictive a = gp_loo_predictive(m, i);
      const LooPredictive b = loo_predictive(st, d.data, i, d.sigma2);
      worst = std::max({worst, std::abs(a.m2 - b.m2), std::abs(a.s2_sq - b.s2_sq)});
      const SwapCoefficients sa = gp_swap_coefficients(m, i, xs);
      const SwapCoefficients sb = swap_coefficients_fast(st, d.data, i, xs, d.sigma2);
      worst = std::max({worst, std::abs(sa.c - sb.c), std::abs(sa.d - sb.d), std::abs(sa.s1_sq - sb.s1_sq)});
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("linear kernel and conjugate backends assemble identical problems") {
  oracle::Gen g(4);
  const Dual d = dual_instance(g, 30, 4);
  const PosteriorState st = fit_posterior(d.data, d.prior);
  const GpModel m(d.data.X, d.data.y, d.kernel, d.sigma2);
  const VectorXd xs = g.normal_vector(4);
  const DivergenceKind k = DivergenceKind::dpd(1.0);
  const CppProblem a = gp_problem(m, xs, k, 1.0);
  const CppProblem b = assemble_problem(swap_all(st, d.data, xs), d.sigma2, k, 1.0);
  CHECK((a.m2 - b.m2).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((a.s2_sq - b.s2_sq).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((a.c - b.c).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((a.d - b.d).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((a.s1_sq - b.s1_sq).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(std::abs(a.map_prediction - b.map_prediction) <= 1e-8);
}

TEST_CASE("LOO equals a direct refit for squared-exponential kernels") {
  oracle::Gen g(5);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const MatrixXd X = g.normal_matrix(15, 2);
    const VectorXd y = g.normal_vector(15);
    const KernelSpec k = KernelSpec::squared_exponential(g.uniform(0.5, 2.0), g.uniform(0.5, 2.0), g.normal());
    const double s2 = g.uniform(0.05, 1.0);
    const GpModel m(X, y, k, s2);
    for (Index i = 0; i < 15; ++i) {
      const LooPredictive a = gp_loo_predictive(m, i);
      const GaussianLaw o = oracle::gp_refit_predictive(drop_row(X, i), drop_entry(y, i), k, s2, X.row(i).transpose());
      worst = std::max({worst, std::abs(a.m2 - o.mean), std::abs(a.s2_sq - o.var)});
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("swap coefficients equal direct refits of the augmented data") {
  oracle::Gen g(6);
  double worst = 0.0;
  double worst_collinear = 0.0;
  for (int t = 0; t < 10; ++t) {
    const MatrixXd X = g.normal_matrix(12, 2);
    const VectorXd y = g.normal_vector(12);
    const KernelSpec k = KernelSpec::squared_exponential(g.uniform(0.5, 2.0), g.uniform(0.5, 2.0), g.normal());
    const double s2 = g.uniform(0.05, 1.0);
    const GpModel m(X, y, k, s2);
    const VectorXd xn = g.normal_vector(2);
    for (Index i = 0; i < 12; ++i) {
      const SwapCoefficients s = gp_swap_coefficients(m, i, xn);
      for (double a : {-1.0, 0.0, 1.0, 3.7}) {
        MatrixXd Xa = X;
        VectorXd ya = y;
        Xa.row(i) = xn.transpose();
        ya(i) = a;
        const GaussianLaw o = oracle::gp_refit_predictive(Xa, ya, k, s2, X.row(i).transpose());
        worst = std::max({worst, std::abs(s.mean(a) - o.mean), std::abs(s.s1_sq - o.var)});
      }
      const double m0 = gp_swapped_mean(m, i, xn, 0.0);
      const double m1 = gp_swapped_mean(m, i, xn, 1.0);
      const double mm1 = gp_swapped_mean(m, i, xn, -1.0);
      worst_collinear = std::max(worst_collinear, std::abs(mm1 - (2.0 * m0 - m1)));
    }
  }
  CHECK(worst <= 1e-8);
  CHECK(worst_collinear <= 1e-10);
}

TEST_CASE("swapping in the same point reproduces the full-data predictive") {
  oracle::Gen g(7);
  const MatrixXd X = g.normal_matrix(10, 3);
  const VectorXd y = g.normal_vector(10);
  const GpModel m(X, y, KernelSpec::squared_exponential(1.2, 1.5, 0.2), 0.3);
  for (Index i = 0; i < 10; ++i) {
    const VectorXd xi = X.row(i).transpose();
    const SwapCoefficients s = gp_swap_coefficients(m, i, xi);
    CHECK(std::abs(s.mean(y(i)) - gp_predictive(m, xi).mean) < 1e-10);
  }
}
