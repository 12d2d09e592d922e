#include "cpred/lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cpred/errors.hpp"
#include "cpred/variance.hpp"

namespace cpred {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kData = 0, kContam = 1, kDraws = 2 };

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill so the stream does not depend on the storage order.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = z(rng);
  }
  return m;
}

Dataset draw_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta, double sigma,
                   std::mt19937_64& rng) {
  Dataset d;
  d.X = X;
  d.y = X * beta + sigma * standard_normal(X.rows(), 1, rng).col(0);
  return d;
}

template <bool Parallel>
ScenarioSummary run_scenario_impl(const SimScenario& scenario) {
  scenario.validate();
  std::vector<ReplicateResult> reps(static_cast<std::size_t>(scenario.n_replicates));
#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
  for (int r = 0; r < scenario.n_replicates; ++r) {
    reps[static_cast<std::size_t>(r)] = run_replicate(scenario, r);
  }
  return summarize_replicates(std::move(reps));
}

}  // namespace

Eigen::VectorXd SimScenario::beta() const {
  if (beta_true.size() > 0) return beta_true;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  const double head[] = {1.0, -1.0, 0.5};
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(p, 3); ++k) b(k) = head[k];
  return b;
}

void SimScenario::validate() const {
  if (n < 2 || p < 1) throw InvalidInput("scenario needs n >= 2 and p >= 1");
  if (beta_true.size() > 0 && beta_true.size() != p) throw InvalidInput("beta_true has the wrong length");
  if (!(sigma >= 0.0)) throw InvalidInput("sigma must be non-negative");
  if (!(outlier_frac >= 0.0 && outlier_frac < 1.0)) throw InvalidInput("outlier_frac must lie in [0, 1)");
  if (!(outlier_scale > 0.0)) throw InvalidInput("outlier_scale must be positive");
  if (n_replicates < 1 || n_test < 1 || n_draws < 1) throw InvalidInput("counts must be positive");
  if (!(a0 > 0.0 && b0 > 0.0 && v_scale > 0.0)) throw InvalidInput("prior hyperparameters must be positive");
  divergence.validate();
  cpp.validate();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64((index << 8) | (stream & 0xff)));
}

GeneratedData generate_data(const SimScenario& scenario, std::uint64_t replicate_seed) {
  std::mt19937_64 rng(replicate_seed);
  const Eigen::VectorXd beta = scenario.beta();
  GeneratedData g;
  const Eigen::MatrixXd X = standard_normal(scenario.n, scenario.p, rng);
  g.train = draw_model(X, beta, scenario.sigma, rng);
  const Eigen::MatrixXd Xt = standard_normal(scenario.n_test, scenario.p, rng);
  g.test = draw_model(Xt, beta, scenario.sigma, rng);
  return g;
}

ContaminatedData contaminate(const Dataset& data, const ContaminationSpec& spec,
                             std::uint64_t seed) {
  if (!(spec.frac >= 0.0 && spec.frac < 1.0)) throw InvalidInput("contamination frac must lie in [0, 1)");
  if (!(spec.perturb_sd > 0.0)) throw InvalidInput("perturb_sd must be positive");
  std::mt19937_64 rng(seed);
  ContaminatedData out;
  out.data = data;
  const auto k = static_cast<std::size_t>(std::floor(spec.frac * static_cast<double>(data.n())));
  if (k > 0) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.n()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i : idx) out.data.y(i) += spec.perturb_sd * z(rng);
    out.perturbed = std::move(idx);
  }
  out.transform = Standardizer::fit(out.data.X);
  out.data.X = out.transform.apply(out.data.X);
  return out;
}

double log_normal_density(double y, const GaussianLaw& law) {
  law.validate();
  const double z = y - law.mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * law.var) + z * z / law.var);
}

double mlpd(const Eigen::VectorXd& test_y, const std::vector<GaussianLaw>& cpp,
            const std::vector<GaussianLaw>& map) {
  const auto n = static_cast<std::size_t>(test_y.size());
  if (n == 0) throw InvalidInput("empty test set");
  if (cpp.size() != n || map.size() != n) throw InvalidInput("predictive laws do not match the test set");
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = test_y(static_cast<Eigen::Index>(k));
    s += log_normal_density(y, cpp[k]) - log_normal_density(y, map[k]);
  }
  return s / static_cast<double>(n);
}

CppPrediction predict_unknown_variance(const PosteriorState& state, const Dataset& data,
                                       const Eigen::VectorXd& x_new,
                                       const std::vector<double>& sigma2_draws,
                                       const DivergenceKind& divergence, const CppConfig& cfg,
                                       Approach approach) {
  const LinearTerms terms = swap_all(state, data, x_new);
  const ProblemBuilder build = [&terms, &divergence](double s2) {
    return assemble_problem(terms, s2, divergence, std::sqrt(s2));
  };
  CppPrediction out;
  out.map_pred = terms.map_prediction;
  const double mean_s2 = std::accumulate(sigma2_draws.begin(), sigma2_draws.end(), 0.0) /
                         static_cast<double>(sigma2_draws.size());
  out.pred_var = mean_s2 * (1.0 + terms.map_leverage);
  if (approach == Approach::I) {
    const ApproachIResult r = solve_approach_I(build, sigma2_draws, cfg);
    out.a_star = r.a_hat;
    out.sigma_hat = r.sigma_hat;
    out.boundary_draws = r.n_boundary;
    out.nonconvex_draws = r.n_nonconvex;
  } else {
    const CppSolution s = solve_approach_II(build, sigma2_draws, cfg);
    out.a_star = s.a_star;
    for (double s2 : sigma2_draws) out.sigma_hat += std::sqrt(s2);
    out.sigma_hat /= static_cast<double>(sigma2_draws.size());
    out.boundary_draws = s.boundary ? 1 : 0;
    out.nonconvex_draws = s.convexity_ok ? 0 : 1;
  }
  return out;
}

CppPrediction predict_known_variance(const PosteriorState& state, const Dataset& data,
                                     const Eigen::VectorXd& x_new, double sigma2,
                                     const DivergenceKind& divergence, const CppConfig& cfg) {
  const LinearTerms terms = swap_all(state, data, x_new);
  const CppProblem prob = assemble_problem(terms, sigma2, divergence, std::sqrt(sigma2));
  const CppSolution s = solve(prob, cfg);
  CppPrediction out;
  out.a_star = s.a_star;
  out.map_pred = terms.map_prediction;
  out.pred_var = sigma2 * (1.0 + terms.map_leverage);
  out.sigma_hat = std::sqrt(sigma2);
  out.boundary_draws = s.boundary ? 1 : 0;
  out.nonconvex_draws = s.convexity_ok ? 0 : 1;
  return out;
}

ReplicateResult run_replicate(const SimScenario& scenario, int index) {
  ReplicateResult res;
  res.index = index;
  res.seed = derive_seed(scenario.seed, static_cast<std::uint64_t>(index));
  try {
    const GeneratedData g = generate_data(scenario, derive_seed(res.seed, 0, kData));
    const ContaminationSpec spec{scenario.outlier_frac,
                                 scenario.outlier_scale * std::max(scenario.sigma, 1e-300)};
    const ContaminatedData cd = contaminate(g.train, spec, derive_seed(res.seed, 0, kContam));
    res.n_perturbed = cd.perturbed.size();

    const PriorSpec prior = PriorSpec::isotropic(scenario.p, scenario.v_scale);
    const PosteriorState state = fit_posterior(cd.data, prior);
    const std::vector<double> draws =
        draw_inverse_gamma(sigma2_posterior(cd.data, prior, state, scenario.a0, scenario.b0),
                           scenario.n_draws, derive_seed(res.seed, 0, kDraws));

    const Eigen::MatrixXd Xt = cd.transform.apply(g.test.X);
    const Eigen::VectorXd beta = scenario.beta();
    double shift = 0.0;
    for (Eigen::Index k = 0; k < Xt.rows(); ++k) {
      const CppPrediction pr = predict_unknown_variance(state, cd.data, Xt.row(k).transpose(), draws,
                                                        scenario.divergence, scenario.cpp,
                                                        scenario.approach);
      PointRecord pt;
      pt.y = g.test.y(k);
      pt.truth = g.test.X.row(k).dot(beta);
      pt.a_star = pr.a_star;
      pt.map_pred = pr.map_pred;
      pt.pred_var = pr.pred_var;
      pt.gain = log_normal_density(pt.y, {pt.a_star, pt.pred_var}) -
                log_normal_density(pt.y, {pt.map_pred, pt.pred_var});
      res.points.push_back(pt);
      res.mlpd += pt.gain;
      res.a_star += pt.a_star;
      res.map_pred += pt.map_pred;
      shift += std::abs(pt.a_star - pt.map_pred) / pr.sigma_hat;
      res.sigma_hat = pr.sigma_hat;
      res.boundary_draws += pr.boundary_draws;
      res.nonconvex_draws += pr.nonconvex_draws;
    }
    const double nt = static_cast<double>(Xt.rows());
    res.mlpd /= nt;
    res.a_star /= nt;
    res.map_pred /= nt;
    res.mean_abs_shift = shift / nt;
    res.cpp_positive = res.mlpd > 0.0;
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

ScenarioSummary summarize_replicates(std::vector<ReplicateResult> reps) {
  ScenarioSummary s;
  std::vector<double> vals;
  std::size_t positive = 0;
  for (const ReplicateResult& r : reps) {
    if (r.failed) {
      ++s.n_failed;
      continue;
    }
    vals.push_back(r.mlpd);
    if (r.cpp_positive) ++positive;
  }
  s.n_ok = vals.size();
  if (!vals.empty()) {
    const double n = static_cast<double>(vals.size());
    s.mean_mlpd = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - s.mean_mlpd) * (v - s.mean_mlpd);
      s.se = std::sqrt(ss / (n - 1.0) / n);
    }
    s.ci_lower = s.mean_mlpd - 1.96 * s.se;
    s.ci_upper = s.mean_mlpd + 1.96 * s.se;
    s.pct_positive = 100.0 * static_cast<double>(positive) / n;
  }
  s.replicates = std::move(reps);
  return s;
}

ScenarioSummary run_scenario(const SimScenario& scenario) {
  return run_scenario_impl<true>(scenario);
}

ScenarioSummary run_scenario_serial(const SimScenario& scenario) {
  return run_scenario_impl<false>(scenario);
}

SweepResult influence_sweep(const Dataset& data, const PriorSpec& prior,
                            const Eigen::VectorXd& x_new, Eigen::Index j,
                            const std::vector<double>& magnitudes,
                            const DivergenceKind& divergence, const CppConfig& cfg) {
  if (j < 0 || j >= data.n()) throw InvalidInput("sweep index out of range");
  if (!prior.sigma2) throw InvalidInput("influence_sweep needs a known sigma2");
  if (magnitudes.empty()) throw InvalidInput("no sweep magnitudes");
  const double sigma2 = *prior.sigma2;

  SweepResult out;
  out.sigma_hat = std::sqrt(sigma2);
  Dataset d = data;
  for (double m : magnitudes) {
    d.y(j) = m;
    const PosteriorState state = fit_posterior(d, prior);
    if (out.trajectory.empty()) out.analytic_slope = x_new.dot(state.Ainv * d.X.row(j).transpose());
    const CppPrediction pr = predict_known_variance(state, d, x_new, sigma2, divergence, cfg);
    out.trajectory.push_back({m, pr.a_star, pr.map_pred, pr.boundary_draws > 0});
  }
  auto range = [&](auto field) {
    double lo = field(out.trajectory.front());
    double hi = lo;
    for (const SweepPoint& p : out.trajectory) {
      lo = std::min(lo, field(p));
      hi = std::max(hi, field(p));
    }
    return hi - lo;
  };
  out.cpp_range = range([](const SweepPoint& p) { return p.a_star; });
  out.map_range = range([](const SweepPoint& p) { return p.map_pred; });
  for (std::size_t k = 1; k < out.trajectory.size(); ++k) {
    const SweepPoint& a = out.trajectory[k - 1];
    const SweepPoint& b = out.trajectory[k];
    if (a.magnitude == b.magnitude) continue;
    const double slope = (b.map_pred - a.map_pred) / (b.magnitude - a.magnitude);
    out.max_slope_error = std::max(out.max_slope_error, std::abs(slope - out.analytic_slope));
  }
  return out;
}

double elpd_difference(const std::vector<PointRecord>& points) {
  if (points.empty()) throw InvalidInput("no test points");
  double s = 0.0;
  for (const PointRecord& p : points) {
    const double em = p.truth - p.map_pred;
    const double ec = p.truth - p.a_star;
    s += (em * em - ec * ec) / (2.0 * p.pred_var);
  }
  return s / static_cast<double>(points.size());
}

ElpdProbeResult elpd_probe(const SimScenario& scenario) {
  scenario.validate();
  SimScenario clean = scenario;
  clean.outlier_frac = 0.0;
  const ScenarioSummary eps = run_scenario(scenario);
  const ScenarioSummary base = run_scenario(clean);

  ElpdProbeResult out;
  std::vector<double> diffs;
  double sum_eps = 0.0;
  double sum_clean = 0.0;
  double sum_mlpd = 0.0;
  for (std::size_t r = 0; r < eps.replicates.size(); ++r) {
    const ReplicateResult& a = eps.replicates[r];
    const ReplicateResult& b = base.replicates[r];
    if (a.failed || b.failed) continue;
    const double ea = elpd_difference(a.points);
    const double eb = elpd_difference(b.points);
    sum_eps += ea;
    sum_clean += eb;
    sum_mlpd += a.mlpd;
    diffs.push_back(ea - eb);
  }
  out.n_ok = diffs.size();
  if (diffs.empty()) return out;
  const double n = static_cast<double>(diffs.size());
  out.contaminated = sum_eps / n;
  out.clean = sum_clean / n;
  out.mlpd_contaminated = sum_mlpd / n;
  out.difference = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  if (diffs.size() > 1) {
    double ss = 0.0;
    for (double v : diffs) ss += (v - out.difference) * (v - out.difference);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace cpred
