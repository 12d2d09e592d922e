#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cpred/errors.hpp"
#include "cpred/lab.hpp"
#include "cpred/variance.hpp"
#include "oracles.hpp"

using namespace cpred;

namespace {

SimScenario small_scenario() {
  SimScenario s;
  s.n = 60;
  s.p = 3;
  s.n_test = 10;
  s.n_draws = 40;
  s.n_replicates = 4;
  s.outlier_frac = 0.05;
  s.seed = 4242;
  return s;
}

bool same(const Dataset& a, const Dataset& b) { return a.X == b.X && a.y == b.y; }

}  // namespace

TEST_CASE("default scenario") {
  const SimScenario s;
  CHECK(s.n == 200);
  CHECK(s.p == 6);
  CHECK(s.n_draws == 500);
  CHECK(s.a0 == 0.1);
  CHECK(s.b0 == 0.1);
  const Eigen::VectorXd b = s.beta();
  CHECK(b(0) == 1.0);
  CHECK(b(1) == -1.0);
  CHECK(b(2) == 0.5);
  CHECK(b.tail(3).isZero());
  SimScenario bad = s;
  bad.outlier_frac = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("data generation") {
  SimScenario s = small_scenario();
  SUBCASE("determinism") {
    const GeneratedData a = generate_data(s, 17);
    const GeneratedData b = generate_data(s, 17);
    CHECK(same(a.train, b.train));
    CHECK(same(a.test, b.test));
    CHECK_FALSE(same(a.train, generate_data(s, 18).train));
    CHECK(a.train.n() == 60);
    CHECK(a.test.n() == 10);
  }
  SUBCASE("noiseless limit") {
    s.sigma = 0.0;
    const GeneratedData g = generate_data(s, 3);
    CHECK(g.test.y == g.test.X * s.beta());
    CHECK(g.train.y == g.train.X * s.beta());
  }
  SUBCASE("noise moments") {
    s.n = 10000;
    s.sigma = 1.7;
    const GeneratedData g = generate_data(s, 5);
    const Eigen::VectorXd e = g.train.y - g.train.X * s.beta();
    const double m = e.mean();
    const double sd = std::sqrt((e.array() - m).square().sum() / (e.size() - 1.0));
    // SE of the sample sd is about sigma / sqrt(2 n).
    CHECK(std::abs(sd - s.sigma) <= 3.0 * s.sigma / std::sqrt(2.0 * 10000.0));
  }
}

TEST_CASE("contamination") {
  oracle::Gen g(6);
  const Dataset d = g.dataset(50, 3);
  SUBCASE("no contamination only standardizes") {
    const ContaminatedData c = contaminate(d, {0.0, 10.0}, 1);
    CHECK(c.data.y == d.y);
    CHECK(c.perturbed.empty());
  }
  SUBCASE("one observation") {
    const ContaminatedData c = contaminate(d, {1.0 / 50.0, 10.0}, 2);
    REQUIRE(c.perturbed.size() == 1);
    for (Index i = 0; i < 50; ++i) {
      if (i == c.perturbed[0]) {
        CHECK(c.data.y(i) != d.y(i));
      } else {
        CHECK(c.data.y(i) == d.y(i));
      }
    }
  }
  SUBCASE("floor of the fraction") {
    CHECK(contaminate(d, {0.079, 10.0}, 3).perturbed.size() == 3);
    CHECK(contaminate(d, {0.1, 10.0}, 3).perturbed.size() == 5);
  }
  SUBCASE("standardized columns") {
    const ContaminatedData c = contaminate(d, {0.1, 10.0}, 4);
    for (Index j = 0; j < 3; ++j) {
      const auto col = c.data.X.col(j).array();
      const double m = col.mean();
      const double sd = std::sqrt((col - m).square().sum() / 49.0);
      CHECK(std::abs(m) <= 1e-12);
      CHECK(std::abs(sd - 1.0) <= 1e-12);
    }
    CHECK((c.transform.invert(c.data.X) - d.X).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("perturbation scale") {
    Dataset big = g.dataset(20000, 1);
    const ContaminatedData c = contaminate(big, {0.5, 7.0}, 5);
    double ss = 0.0;
    for (Index i : c.perturbed) ss += std::pow(c.data.y(i) - big.y(i), 2);
    const double sd = std::sqrt(ss / static_cast<double>(c.perturbed.size()));
    CHECK(std::abs(sd - 7.0) <= 3.0 * 7.0 / std::sqrt(2.0 * 10000.0));
  }
  CHECK_THROWS_AS(contaminate(d, {1.0, 10.0}, 1), InvalidInput);
}

TEST_CASE("MLPD") {
  const Eigen::Vector2d y(0.5, -1.0);
  const std::vector<GaussianLaw> map{{0.0, 2.0}, {0.0, 1.5}};
  CHECK(mlpd(y, map, map) == 0.0);
  const std::vector<GaussianLaw> closer{{0.4, 2.0}, {-0.8, 1.5}};
  CHECK(mlpd(y, closer, map) > 0.0);
  const auto logn = [](double v, double m, double s2) {
    return -0.5 * std::log(2.0 * std::numbers::pi * s2) - (v - m) * (v - m) / (2.0 * s2);
  };
  const double hand = 0.5 * ((logn(0.5, 0.4, 2.0) - logn(0.5, 0.0, 2.0)) +
                             (logn(-1.0, -0.8, 1.5) - logn(-1.0, 0.0, 1.5)));
  CHECK(mlpd(y, closer, map) == doctest::Approx(hand).epsilon(1e-14));
  CHECK(log_normal_density(0.0, {0.0, 1.0}) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
  CHECK_THROWS_AS(mlpd(Eigen::VectorXd(0), {}, {}), InvalidInput);
}

TEST_CASE("replicates are deterministic and order independent") {
  const SimScenario s = small_scenario();
  const ScenarioSummary a = run_scenario(s);
  const ScenarioSummary b = run_scenario_serial(s);
  const ScenarioSummary c = run_scenario(s);
  REQUIRE(a.replicates.size() == 4);
  CHECK(a.n_ok == 4);
  CHECK(a.mean_mlpd == b.mean_mlpd);
  CHECK(a.mean_mlpd == c.mean_mlpd);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(a.replicates[r].mlpd == b.replicates[r].mlpd);
    CHECK(a.replicates[r].seed == b.replicates[r].seed);
    CHECK(a.replicates[r].n_perturbed == 3);
    CHECK(std::isfinite(a.replicates[r].mlpd));
    CHECK(a.replicates[r].points.size() == 10);
  }
  const ReplicateResult one = run_replicate(s, 2);
  CHECK(one.mlpd == a.replicates[2].mlpd);
}

TEST_CASE("replicate records are consistent") {
  const ReplicateResult r = run_replicate(small_scenario(), 0);
  REQUIRE_FALSE(r.failed);
  double m = 0.0;
  for (const PointRecord& p : r.points) {
    const double g = log_normal_density(p.y, {p.a_star, p.pred_var}) -
                     log_normal_density(p.y, {p.map_pred, p.pred_var});
    CHECK(p.gain == doctest::Approx(g).epsilon(1e-12));
    CHECK(p.pred_var > 0.0);
    m += p.gain / 10.0;
  }
  CHECK(r.mlpd == doctest::Approx(m).epsilon(1e-12));
  CHECK(r.cpp_positive == (r.mlpd > 0.0));
}

TEST_CASE("scenario summary statistics") {
  std::vector<ReplicateResult> reps(4);
  const double vals[] = {0.1, 0.3, -0.2, 0.0};
  for (int k = 0; k < 4; ++k) {
    reps[k].mlpd = vals[k];
    reps[k].cpp_positive = vals[k] > 0.0;
  }
  reps.push_back(ReplicateResult{});
  reps.back().failed = true;
  const ScenarioSummary s = summarize_replicates(reps);
  CHECK(s.n_ok == 4);
  CHECK(s.n_failed == 1);
  CHECK(s.mean_mlpd == doctest::Approx(0.05));
  const double sd = std::sqrt((0.0025 + 0.0625 + 0.0625 + 0.0025) / 3.0);
  CHECK(s.se == doctest::Approx(sd / 2.0));
  CHECK(s.ci_lower == doctest::Approx(0.05 - 1.96 * sd / 2.0));
  CHECK(s.pct_positive == doctest::Approx(50.0));
}

TEST_CASE("unknown-variance prediction with degenerate draws equals known variance") {
  oracle::Gen g(9);
  const Dataset d = g.dataset(40, 3);
  const PosteriorState st = fit_posterior(d, PriorSpec::isotropic(3));
  const Eigen::VectorXd xn = g.normal_vector(3);
  const CppPrediction k = predict_known_variance(st, d, xn, 0.9, DivergenceKind::dpd(1.0), CppConfig{});
  const CppPrediction u = predict_unknown_variance(st, d, xn, std::vector<double>(5, 0.9),
                                                   DivergenceKind::dpd(1.0), CppConfig{});
  CHECK(k.a_star == u.a_star);
  CHECK(k.pred_var == doctest::Approx(u.pred_var));
  CHECK(k.pred_var == doctest::Approx(0.9 * (1.0 + st.leverage_at(xn))));
}

TEST_CASE("influence sweep") {
  oracle::Gen g(10);
  const Dataset d = g.dataset(60, 3);
  PriorSpec pr = PriorSpec::isotropic(3);
  pr.sigma2 = 1.0;
  const Eigen::VectorXd xn = g.normal_vector(3);
  const Index j = 7;
  std::vector<double> mags{d.y(j)};
  for (double e = 1; e <= 6; ++e) {
    mags.push_back(std::pow(10.0, e));
    mags.push_back(-std::pow(10.0, e));
  }
  const SweepResult s = influence_sweep(d, pr, xn, j, mags, DivergenceKind::hellinger(), CppConfig{});
  REQUIRE(s.trajectory.size() == mags.size());
  const PosteriorState base = fit_posterior(d, pr);
  CHECK(s.trajectory[0].map_pred == doctest::Approx(base.map_mean(xn)).epsilon(1e-12));
  CHECK(s.trajectory[0].a_star ==
        predict_known_variance(base, d, xn, 1.0, DivergenceKind::hellinger(), CppConfig{}).a_star);
  CHECK(s.analytic_slope == doctest::Approx(xn.dot(base.Ainv * d.X.row(j).transpose())).epsilon(1e-12));
  CHECK(s.max_slope_error <= 1e-10);
  CHECK(s.map_range > 1e3 * s.sigma_hat);
  MESSAGE("Hellinger sweep range " << s.cpp_range / s.sigma_hat << " sigma_hat, MAP range "
                                   << s.map_range / s.sigma_hat << " sigma_hat");
  CHECK_THROWS_AS(influence_sweep(d, PriorSpec::isotropic(3), xn, j, mags, DivergenceKind::hellinger(), CppConfig{}),
                  InvalidInput);
}

TEST_CASE("ELPD difference") {
  std::vector<PointRecord> pts(2);
  pts[0].truth = 1.0;
  pts[0].map_pred = 1.5;
  pts[0].a_star = 1.2;
  pts[0].pred_var = 2.0;
  pts[1].truth = -1.0;
  pts[1].map_pred = -1.0;
  pts[1].a_star = -0.5;
  pts[1].pred_var = 1.0;
  const double hand = 0.5 * ((0.25 - 0.04) / 4.0 + (0.0 - 0.25) / 2.0);
  CHECK(elpd_difference(pts) == doctest::Approx(hand).epsilon(1e-14));
}

TEST_CASE("ELPD probe without contamination") {
  SimScenario s = small_scenario();
  s.outlier_frac = 0.0;
  const ElpdProbeResult r = elpd_probe(s);
  CHECK(r.n_ok == 4);
  CHECK(r.difference == 0.0);
  CHECK(r.contaminated == r.clean);
}

TEST_CASE("ELPD probe favours the bounded score at large perturbations") {
  SimScenario s = small_scenario();
  s.n_replicates = 8;
  s.outlier_frac = 0.05;
  std::vector<double> diffs;
  for (double scale : {5.0, 20.0, 80.0}) {
    s.outlier_scale = scale;
    const ElpdProbeResult r = elpd_probe(s);
    MESSAGE("perturb_sd " << scale << ": ELPD difference " << r.difference << " (SE " << r.se
                          << "), MLPD " << r.mlpd_contaminated);
    diffs.push_back(r.difference);
    // Same direction as the MLPD summary on identical seeds.
    if (std::abs(r.difference) > 2.0 * r.se && std::abs(r.mlpd_contaminated) > 1e-3) {
      CHECK((r.difference > 0.0) == (r.mlpd_contaminated > 0.0));
    }
  }
  // Bounded influence against the unbounded plug-in: positive once the perturbation is large.
  CHECK(diffs.back() > 0.0);
}
