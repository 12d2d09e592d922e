#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cpred/errors.hpp"
#include "cpred/solver.hpp"
#include "cpred/variance.hpp"
#include "oracles.hpp"

using namespace cpred;

namespace {

CppProblem single_term(double m2, double c, double d, DivergenceKind k, double map = 0.0,
                       double sigma_hat = 2.0, double s1 = 1.0, double s2 = 1.0) {
  CppProblem p;
  p.m2 = Eigen::VectorXd::Constant(1, m2);
  p.c = Eigen::VectorXd::Constant(1, c);
  p.d = Eigen::VectorXd::Constant(1, d);
  p.s1_sq = Eigen::VectorXd::Constant(1, s1);
  p.s2_sq = Eigen::VectorXd::Constant(1, s2);
  p.divergence = k;
  p.map_prediction = map;
  p.sigma_hat = sigma_hat;
  return p;
}

// Terms whose swapped means all pass near a0, plus a few outlying terms.
CppProblem random_problem(oracle::Gen& g, Eigen::Index n, DivergenceKind k, double a0,
                           double outlier_sd = 8.0) {
  CppProblem p;
  p.m2.resize(n);
  p.c.resize(n);
  p.d.resize(n);
  p.s1_sq.resize(n);
  p.s2_sq.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.d(i) = g.uniform(0.02, 0.6) * (g.uniform(0, 1) < 0.5 ? -1.0 : 1.0);
    p.c(i) = g.normal(0.0, 1.0);
    const double s1 = g.uniform(0.5, 2.0);
    p.s1_sq(i) = s1;
    p.s2_sq(i) = s1 * g.uniform(1.0, 1.5);
    const double noise = i % 7 == 3 ? g.normal(0.0, outlier_sd) : g.normal(0.0, 0.3);
    p.m2(i) = p.c(i) + p.d(i) * a0 + noise;
  }
  p.divergence = k;
  p.map_prediction = a0 + g.normal(0.0, 0.3);
  p.sigma_hat = 1.0;
  return p;
}

double brute_force(const CppProblem& p, double half_width, int points) {
  return oracle::grid_argmin(
      [&](double a) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
          s += term_divergence(p.divergence, p.gap(i, a), p.s1_sq(i), p.s2_sq(i));
        }
        return s;
      },
      p.map_prediction - half_width, p.map_prediction + half_width, points);
}

}  // namespace

TEST_CASE("assembled gaps") {
  const CppProblem p = single_term(5.0, 0.0, 1.0, DivergenceKind::dpd(1.0));
  for (double a : {-3.0, 0.0, 2.5, 5.0}) CHECK(p.gap(0, a) == 5.0 - a);

  std::vector<LooPredictive> loo{{1.0, 1.5}};
  std::vector<SwapCoefficients> sw(1);
  sw[0].c = 2.0 / 3.0;
  sw[0].d = 1.0 / 3.0;
  sw[0].s1_sq = 4.0 / 3.0;
  const CppProblem q = assemble_problem(loo, sw, DivergenceKind::logbc(), 2.0 / 3.0, 1.0);
  CHECK(q.size() == 1);
  CHECK(q.c(0) == 2.0 / 3.0);
  CHECK(q.d(0) == 1.0 / 3.0);
  CHECK(q.gap(0, 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("all-zero slopes are rejected") {
  CppProblem p = single_term(5.0, 0.0, 0.0, DivergenceKind::hellinger());
  CHECK_THROWS_AS(p.validate(), AllDZero);
  CHECK_THROWS_AS(solve(p, CppConfig{}), AllDZero);
  std::vector<LooPredictive> loo{{1.0, 1.5}, {0.0, 1.2}};
  std::vector<SwapCoefficients> sw(2);
  sw[0].s1_sq = sw[1].s1_sq = 1.1;
  CHECK_THROWS_AS(assemble_problem(loo, sw, DivergenceKind::logbc(), 0.0, 1.0), AllDZero);
}

TEST_CASE("log-BC closed form examples") {
  const CppSolution s = solve_logbc_closed_form(single_term(5.0, 0.0, 1.0, DivergenceKind::logbc()));
  CHECK(s.a_star == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(s.converged);

  CppProblem two = single_term(0.0, 0.0, 1.0, DivergenceKind::logbc());
  two.m2 = Eigen::Vector2d(3.0 + 2.0, 3.0 - 2.0);
  two.c = Eigen::Vector2d::Zero();
  two.d = Eigen::Vector2d::Ones();
  two.s1_sq = Eigen::Vector2d::Ones();
  two.s2_sq = Eigen::Vector2d::Ones();
  CHECK(solve_logbc_closed_form(two).a_star == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(solve_logbc_closed_form(single_term(5, 0, 1, DivergenceKind::hellinger())), InvalidInput);
}

TEST_CASE("log-BC closed form matches a dense grid on random problems") {
  oracle::Gen g(1001);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const CppProblem p = random_problem(g, 10, DivergenceKind::logbc(), g.normal(0.0, 2.0));
    const double a = solve_logbc_closed_form(p).a_star;
    const double grid = brute_force(p, 60.0, 20001);
    worst = std::max(worst, std::abs(a - grid));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("objective value examples") {
  SUBCASE("zero gap gives the variance-mismatch floor") {
    for (const DivergenceKind& k : {DivergenceKind::logbc(), DivergenceKind::hellinger(), DivergenceKind::dpd(0.7)}) {
      CppProblem p = single_term(0, 0, 1, k);
      p.d = Eigen::Vector3d(1.0, 2.0, -0.5);
      p.c = Eigen::Vector3d(0.1, -0.3, 0.7);
      p.s1_sq = Eigen::Vector3d(1.0, 1.4, 0.6);
      p.s2_sq = Eigen::Vector3d(1.2, 2.0, 0.9);
      const double a0 = 0.8;
      p.m2 = p.c + p.d * a0;
      double floor = 0.0;
      for (int i = 0; i < 3; ++i) floor += term_divergence(k, 0.0, p.s1_sq(i), p.s2_sq(i));
      CHECK(objective_eval(p, a0) == doctest::Approx(floor).epsilon(1e-13));
    }
  }
  SUBCASE("Hellinger saturates at n") {
    oracle::Gen g(5);
    const CppProblem p = random_problem(g, 12, DivergenceKind::hellinger(), 0.0);
    CHECK(objective_eval(p, 1e6) == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(objective_eval(p, -1e6) == doctest::Approx(12.0).epsilon(1e-14));
    for (double a : {-5.0, 0.0, 3.0}) CHECK(objective_eval(p, a) <= 12.0);
  }
  SUBCASE("term-by-term quadrature") {
    oracle::Gen g(6);
    for (const DivergenceKind& k : {DivergenceKind::hellinger(), DivergenceKind::dpd(0.5), DivergenceKind::dpd(2.0)}) {
      const CppProblem p = random_problem(g, 6, k, 1.0);
      for (double a : {-1.0, 0.5, 2.0}) {
        double q = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
          const GaussianLaw swapped{p.c(i) + p.d(i) * a, p.s1_sq(i)};
          const GaussianLaw loo{p.m2(i), p.s2_sq(i)};
          q += k.type == DivergenceType::Hellinger ? oracle::quad_hellinger(swapped, loo)
                                                   : oracle::quad_dpd(swapped, loo, k.alpha);
        }
        CHECK(std::abs(objective_eval(p, a) - q) <= 1e-8);
      }
    }
  }
}

TEST_CASE("objective derivative matches finite differences") {
  oracle::Gen g(7);
  for (const DivergenceKind& k : {DivergenceKind::logbc(), DivergenceKind::hellinger(), DivergenceKind::dpd(1.0)}) {
    const CppProblem p = random_problem(g, 15, k, 0.5);
    const Objective obj(p);
    for (double a : {-2.0, 0.0, 0.7, 3.0}) {
      const double fd = oracle::central_diff([&](double x) { return obj.value(x); }, a, 1e-5);
      CHECK(std::abs(obj.derivative(a) - fd) <= 1e-6 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("single-term redescending problems have an exact root") {
  for (const DivergenceKind& k : {DivergenceKind::hellinger(), DivergenceKind::dpd(1.0)}) {
    const CppSolution s = solve_1d(single_term(5.0, 1.0, 2.0, k, 1.5, 2.0), CppConfig{});
    CHECK(std::abs(s.a_star - 2.0) < 1e-7);
    CHECK(s.converged);
    CHECK_FALSE(s.boundary);
    CHECK(s.convexity_ok);
    CHECK(s.curvature > 0.0);
  }
  CHECK_THROWS_AS(solve_1d(single_term(5, 0, 1, DivergenceKind::logbc()), CppConfig{}), InvalidInput);
}

TEST_CASE("translation equivariance") {
  for (const DivergenceKind& k : {DivergenceKind::hellinger(), DivergenceKind::dpd(0.5)}) {
    for (double t : {-3.0, 0.5, 4.0}) {
      const double d = 0.8;
      const double base = solve_1d(single_term(2.0, 0.4, d, k, 2.0, 1.0), CppConfig{}).a_star;
      const double shifted =
          solve_1d(single_term(2.0 + t * d, 0.4, d, k, 2.0 + t, 1.0), CppConfig{}).a_star;
      CHECK(std::abs(shifted - base - t) < 1e-7);
    }
  }
  oracle::Gen g(8);
  for (int r = 0; r < 10; ++r) {
    CppProblem p = random_problem(g, 10, DivergenceKind::logbc(), 0.3);
    const double a = solve_logbc_closed_form(p).a_star;
    const double t = g.normal(0.0, 5.0);
    p.m2.array() += t;
    p.c.array() += t;
    CHECK(solve_logbc_closed_form(p).a_star == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("grid search matches a 1e5-point brute force on random DPD problems") {
  oracle::Gen g(2002);
  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    const CppProblem p = random_problem(g, 20, DivergenceKind::dpd(1.0), g.normal(0.0, 1.0));
    const CppSolution s = solve_1d(p, CppConfig{});
    REQUIRE_FALSE(s.boundary);
    worst = std::max(worst, std::abs(s.a_star - brute_force(p, 4.0, 100000)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("positive curvature wherever the solution is locally convex") {
  oracle::Gen g(2003);
  int convex = 0;
  for (int t = 0; t < 100; ++t) {
    const DivergenceKind k = t % 2 ? DivergenceKind::hellinger() : DivergenceKind::dpd(g.uniform(0.1, 2.0));
    const CppSolution s = solve_1d(random_problem(g, 20, k, 0.0, t % 4 < 2 ? 0.3 : 8.0), CppConfig{});
    if (!s.convexity_ok) continue;
    ++convex;
    CHECK(s.curvature > 0.0);
  }
  CHECK(convex > 0);
}

TEST_CASE("window edge minimum is flagged after doubling") {
  const CppSolution s = solve_1d(single_term(12.0, 0.0, 1.0, DivergenceKind::hellinger(), 0.0, 1.0), CppConfig{});
  CHECK(s.boundary);
  CHECK_FALSE(s.converged);
  CHECK(s.a_star == doctest::Approx(8.0));
}

TEST_CASE("flat objective resolves ties toward the MAP prediction") {
  const CppSolution s = solve_1d(single_term(1000.0, 0.0, 1.0, DivergenceKind::hellinger(), 0.25, 1.0), CppConfig{});
  CHECK(std::abs(s.a_star - 0.25) < 1e-7);
  CHECK_FALSE(s.boundary);
}

TEST_CASE("config validation") {
  CppConfig c;
  c.grid_len = 60;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.grid_len = 1;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = CppConfig{};
  c.window_sd = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = CppConfig{};
  c.truncate_quantile = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("sigma^2 posterior draws") {
  oracle::Gen g(40);
  SUBCASE("determinism") {
    const Dataset d = g.dataset(30, 3);
    const PriorSpec pr = PriorSpec::isotropic(3);
    const auto a = draw_sigma2_posterior(d, pr, 0.1, 0.1, 1, 77);
    const auto b = draw_sigma2_posterior(d, pr, 0.1, 0.1, 1, 77);
    REQUIRE(a.size() == 1);
    CHECK(a[0] == b[0]);
    CHECK(a[0] > 0.0);
  }
  SUBCASE("consistency at n = 500") {
    const Dataset d = g.dataset(500, 4);
    const PriorSpec pr = PriorSpec::isotropic(4);
    const auto draws = draw_sigma2_posterior(d, pr, 0.1, 0.1, 2000, 3);
    double m = 0.0;
    for (double v : draws) m += v / static_cast<double>(draws.size());
    CHECK(std::abs(m - 1.0) < 0.2);
  }
  SUBCASE("inverse-gamma moments") {
    const InverseGammaParams ig{12.0, 30.0};
    const auto draws = draw_inverse_gamma(ig, 10000, 99);
    double m = 0.0, m2 = 0.0;
    for (double v : draws) {
      m += v;
      m2 += v * v;
    }
    m /= 1e4;
    const double sd = std::sqrt(m2 / 1e4 - m * m);
    CHECK(std::abs(m - ig.mean()) <= 3.0 * sd / 100.0);
    CHECK(ig.mean() == doctest::Approx(30.0 / 11.0));
  }
  SUBCASE("posterior parameters") {
    const Dataset d = g.dataset(20, 2);
    const PriorSpec pr = g.prior(2);
    const PosteriorState st = fit_posterior(d, pr);
    const InverseGammaParams ig = sigma2_posterior(d, pr, st, 0.1, 0.2);
    const oracle::Refit r = oracle::refit(d.X, d.y, pr);
    const MatrixXd Vinv = pr.V.inverse();
    // Residual quadratic form written as (y - X b)'(y - X b) + (b - b0)'V^{-1}(b - b0).
    const VectorXd e = d.y - d.X * r.beta;
    const VectorXd db = r.beta - pr.beta0;
    const double rss = e.squaredNorm() + db.dot(Vinv * db);
    CHECK(ig.shape == doctest::Approx(0.1 + 10.0));
    CHECK(ig.scale == doctest::Approx(0.2 + 0.5 * rss).epsilon(1e-10));
  }
}

TEST_CASE("Approach I and II") {
  oracle::Gen g(50);
  const Dataset d = g.dataset(80, 4);
  const PriorSpec pr = PriorSpec::isotropic(4);
  const PosteriorState st = fit_posterior(d, pr);
  const VectorXd xn = g.normal_vector(4);
  const LinearTerms terms = swap_all(st, d, xn);
  const DivergenceKind k = DivergenceKind::dpd(1.0);
  const ProblemBuilder build = [&](double s2) { return assemble_problem(terms, s2, k, std::sqrt(s2)); };
  const CppConfig cfg;

  SUBCASE("degenerate posterior") {
    const std::vector<double> draws(25, 1.3);
    const double fixed = solve_1d(build(1.3), cfg).a_star;
    CHECK(solve_approach_I(build, draws, cfg).a_hat == fixed);
    CHECK(solve_approach_II(build, draws, cfg).a_star == fixed);
  }
  SUBCASE("parallel and serial agree") {
    const auto draws = draw_sigma2_posterior(d, pr, 0.1, 0.1, 200, 8);
    const ApproachIResult a = solve_approach_I(build, draws, cfg);
    const ApproachIResult b = solve_approach_I_serial(build, draws, cfg);
    CHECK(a.a_hat == b.a_hat);
    CHECK(a.n_boundary == b.n_boundary);
    CHECK(a.draw_solutions.size() == 200);
  }
  SUBCASE("median is robust to one corrupted draw") {
    CppConfig med = cfg;
    med.summary = Summary::Median;
    const auto draws = draw_sigma2_posterior(d, pr, 0.1, 0.1, 101, 9);
    const ApproachIResult r = solve_approach_I(build, draws, med);
    std::vector<double> sol;
    for (const auto& s : r.draw_solutions) sol.push_back(s.a_star);
    const double m = summarize(sol, Summary::Median);
    CHECK(m == r.a_hat);
    for (double bad : {1e6, -1e6}) {
      auto hi = sol;
      auto it = bad > 0 ? std::max_element(hi.begin(), hi.end()) : std::min_element(hi.begin(), hi.end());
      *it = bad;
      CHECK(summarize(hi, Summary::Median) == m);
    }
  }
  SUBCASE("500-draw protocol and agreement of the two approaches") {
    const auto draws = draw_sigma2_posterior(d, pr, 0.1, 0.1, 500, 10);
    const ApproachIResult r1 = solve_approach_I(build, draws, cfg);
    const CppSolution r2 = solve_approach_II(build, draws, cfg);
    CHECK(r1.draw_solutions.size() == 500);
    CHECK(std::abs(r1.a_hat - r2.a_star) <= 0.1 * r1.sigma_hat);
  }
  SUBCASE("two-draw log-BC average has the weighted closed form") {
    const ProblemBuilder lb = [&](double s2) {
      return assemble_problem(terms, s2, DivergenceKind::logbc(), std::sqrt(s2));
    };
    const std::vector<double> draws{0.6, 2.1};
    double num = 0.0, den = 0.0;
    for (double s2 : draws) {
      for (Eigen::Index i = 0; i < terms.size(); ++i) {
        const double S = s2 * (terms.loo_scale(i) + terms.swap_scale(i));
        num += terms.d(i) * (terms.m2(i) - terms.c(i)) / S;
        den += terms.d(i) * terms.d(i) / S;
      }
    }
    CHECK(solve_approach_II(lb, draws, cfg).a_star == doctest::Approx(num / den).epsilon(1e-12));
  }
  SUBCASE("per-draw errors carry the draw index") {
    const ProblemBuilder bad = [&](double s2) {
      if (s2 > 2.0) throw InvalidInput("synthetic failure");
      return build(s2);
    };
    try {
      solve_approach_I(bad, {1.0, 1.1, 2.5, 3.0}, cfg);
      FAIL("expected DrawError");
    } catch (const DrawError& e) {
      CHECK(e.draw_index == 2);
    }
  }
  SUBCASE("clean data keeps CPP next to the MAP prediction") {
    const CppSolution s = solve_1d(build(1.0), cfg);
    CHECK(std::abs(s.a_star - terms.map_prediction) <= 0.05);
  }
}

TEST_CASE("draw truncation and summaries") {
  const std::vector<double> v{1, 2, 3, 4, 100};
  const auto t = truncate_draws(v, 0.9);
  // type-7 quantile at 0.9 over 5 points: 4 + 0.6 * 96
  CHECK(t[4] == doctest::Approx(4.0 + 0.6 * 96.0));
  CHECK(t[0] == 1.0);
  CHECK(summarize({3, 1, 2}, Summary::Median) == 2.0);
  CHECK(summarize({4, 1, 3, 2}, Summary::Median) == 2.5);
  CHECK(summarize({1, 2, 6}, Summary::Mean) == 3.0);
}
