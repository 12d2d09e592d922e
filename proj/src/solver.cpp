#include "cpred/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>

#include "cpred/errors.hpp"

namespace cpred {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio

void check_same_size(const CppProblem& p) {
  const Eigen::Index n = p.m2.size();
  if (p.s2_sq.size() != n || p.c.size() != n || p.d.size() != n || p.s1_sq.size() != n) {
    throw InvalidInput("CPP problem arrays have inconsistent lengths");
  }
}

CppSolution closed_form_solution(const Objective& obj) {
  CppSolution sol;
  sol.a_star = obj.closed_form_minimizer();
  sol.objective_at_star = obj.value(sol.a_star);
  sol.converged = true;
  sol.convexity_ok = true;
  sol.curvature = obj.curvature(sol.a_star, 1e-3);
  return sol;
}

double golden_section(const Objective& obj, double lo, double hi, double tol) {
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = obj.variable_part(x1);
  double f2 = obj.variable_part(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = obj.variable_part(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = obj.variable_part(x2);
    }
  }
  return 0.5 * (lo + hi);
}

// Mean computed about the first value; exact when all values coincide.
double shifted_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x - v.front();
  return v.front() + acc / static_cast<double>(v.size());
}

struct GridScan {
  std::vector<double> a;
  int best = 0;
};

GridScan scan(const Objective& obj, double center, double half_width, int len) {
  GridScan g;
  g.a.resize(static_cast<std::size_t>(len));
  double best_v = 0.0;
  for (int k = 0; k < len; ++k) {
    const double a = center - half_width + 2.0 * half_width * k / (len - 1);
    g.a[static_cast<std::size_t>(k)] = a;
    const double v = obj.variable_part(a);
    if (k == 0) {
      best_v = v;
      continue;
    }
    const double tol = 1e-14 * (1.0 + std::abs(best_v));
    const bool lower = v < best_v - tol;
    const bool tie_closer = std::abs(v - best_v) <= tol &&
                            std::abs(a - center) < std::abs(g.a[static_cast<std::size_t>(g.best)] - center);
    if (lower || tie_closer) {
      best_v = std::min(v, best_v);
      g.best = k;
    }
  }
  return g;
}

template <bool Parallel>
ApproachIResult approach_I_impl(const ProblemBuilder& build, const std::vector<double>& input,
                                const CppConfig& cfg) {
  cfg.validate();
  if (input.empty()) throw InvalidInput("no sigma^2 draws");
  const std::vector<double> draws =
      cfg.truncate_quantile ? truncate_draws(input, *cfg.truncate_quantile) : input;
  const long long B = static_cast<long long>(draws.size());

  ApproachIResult res;
  std::vector<double> sigmas;
  sigmas.reserve(draws.size());
  for (double s2 : draws) {
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw InvalidInput("sigma^2 draws must be positive");
    sigmas.push_back(std::sqrt(s2));
  }
  res.sigma_hat = shifted_mean(sigmas);
  res.draw_solutions.resize(draws.size());
  std::vector<std::exception_ptr> errors(draws.size());

#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
  for (long long t = 0; t < B; ++t) {
    try {
      CppProblem prob = build(draws[static_cast<std::size_t>(t)]);
      prob.sigma_hat = res.sigma_hat;
      res.draw_solutions[static_cast<std::size_t>(t)] = solve(prob, cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (std::size_t t = 0; t < errors.size(); ++t) {
    if (!errors[t]) continue;
    try {
      std::rethrow_exception(errors[t]);
    } catch (const std::exception& e) {
      throw DrawError(t, e.what());
    }
  }

  std::vector<double> kept;
  std::vector<double> all;
  kept.reserve(draws.size());
  all.reserve(draws.size());
  for (const CppSolution& s : res.draw_solutions) {
    all.push_back(s.a_star);
    if (s.boundary) {
      ++res.n_boundary;
    } else {
      kept.push_back(s.a_star);
    }
    if (!s.convexity_ok) ++res.n_nonconvex;
  }
  res.all_boundary = kept.empty();
  res.a_hat = summarize(res.all_boundary ? all : kept, cfg.summary);
  return res;
}

}  // namespace

void CppProblem::validate() const {
  check_same_size(*this);
  if (size() < 1) throw InvalidInput("CPP problem needs at least one term");
  divergence.validate();
  if (!(sigma_hat > 0.0) || !std::isfinite(sigma_hat)) throw InvalidInput("sigma_hat must be positive");
  if (!std::isfinite(map_prediction)) throw InvalidInput("MAP prediction must be finite");
  if (!m2.allFinite() || !c.allFinite() || !d.allFinite()) {
    throw InvalidInput("CPP problem has non-finite means");
  }
  if (!((s1_sq.array() > 0.0).all() && (s2_sq.array() > 0.0).all()) || !s1_sq.allFinite() ||
      !s2_sq.allFinite()) {
    throw InvalidInput("CPP problem variances must be positive");
  }
  if ((d.array() == 0.0).all()) throw AllDZero();
}

void CppConfig::validate() const {
  if (grid_len < 3 || grid_len % 2 == 0) throw InvalidInput("grid_len must be odd and >= 3");
  if (!(window_sd > 0.0)) throw InvalidInput("window_sd must be positive");
  if (!(refine_tol > 0.0)) throw InvalidInput("refine_tol must be positive");
  if (truncate_quantile && !(*truncate_quantile > 0.0 && *truncate_quantile <= 1.0)) {
    throw InvalidInput("truncate_quantile must lie in (0, 1]");
  }
}

CppProblem assemble_problem(const std::vector<LooPredictive>& loo,
                            const std::vector<SwapCoefficients>& swap,
                            const DivergenceKind& divergence, double map_prediction,
                            double sigma_hat) {
  if (loo.size() != swap.size()) throw InvalidInput("LOO and swap term counts differ");
  const auto n = static_cast<Eigen::Index>(loo.size());
  CppProblem p;
  p.m2.resize(n);
  p.s2_sq.resize(n);
  p.c.resize(n);
  p.d.resize(n);
  p.s1_sq.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    p.m2(i) = loo[k].m2;
    p.s2_sq(i) = loo[k].s2_sq;
    p.c(i) = swap[k].c;
    p.d(i) = swap[k].d;
    p.s1_sq(i) = swap[k].s1_sq;
  }
  p.divergence = divergence;
  p.map_prediction = map_prediction;
  p.sigma_hat = sigma_hat;
  p.validate();
  return p;
}

CppProblem assemble_problem(const LinearTerms& terms, double sigma2,
                            const DivergenceKind& divergence, double sigma_hat) {
  if (!(sigma2 > 0.0)) throw InvalidInput("sigma2 must be positive");
  CppProblem p;
  p.m2 = terms.m2;
  p.s2_sq = sigma2 * terms.loo_scale;
  p.c = terms.c;
  p.d = terms.d;
  p.s1_sq = sigma2 * terms.swap_scale;
  p.divergence = divergence;
  p.map_prediction = terms.map_prediction;
  p.sigma_hat = sigma_hat;
  p.validate();
  return p;
}

Objective::Objective(const CppProblem& prob, double weight) { append(prob, weight); }

void Objective::append(const CppProblem& prob, double weight) {
  prob.validate();
  const bool quad = prob.divergence.type == DivergenceType::LogBC;
  if (initialized_ && quad != quadratic_) {
    throw InvalidInput("cannot pool objectives of different divergence families");
  }
  quadratic_ = quad;
  initialized_ = true;

  const Eigen::Index n = prob.size();
  const Eigen::ArrayXd v1 = prob.s1_sq.array();
  const Eigen::ArrayXd v2 = prob.s2_sq.array();
  const Eigen::ArrayXd S = v1 + v2;
  Eigen::ArrayXd w(n), kappa(n);
  double base = 0.0;

  switch (prob.divergence.type) {
    case DivergenceType::LogBC: {
      const Eigen::ArrayXd log_c =
          0.5 * (std::log(2.0) + 0.5 * (v1.log() + v2.log()) - S.log());
      base = -log_c.sum();
      w.setOnes();
      kappa = 0.25 / S;
      break;
    }
    case DivergenceType::Hellinger: {
      base = static_cast<double>(n);
      w = (2.0 * (v1 * v2).sqrt() / S).sqrt();
      kappa = 0.25 / S;
      break;
    }
    case DivergenceType::DPD: {
      const double alpha = prob.divergence.alpha;
      for (Eigen::Index i = 0; i < n; ++i) {
        base += gaussian_power_integral(v2(i), alpha) + gaussian_power_integral(v1(i), alpha) / alpha;
      }
      constexpr double kTwoPi = 6.283185307179586;
      const Eigen::ArrayXd cross = (kTwoPi * v2).pow(-0.5 * alpha) * (v2 / (alpha * v1 + v2)).sqrt();
      w = (1.0 + 1.0 / alpha) * cross;
      kappa = alpha / (2.0 * (v2 + alpha * v1));
      break;
    }
  }

  const Eigen::Index old = r_.size();
  auto grow = [&](Eigen::ArrayXd& dst, const Eigen::ArrayXd& src) {
    dst.conservativeResize(old + n);
    dst.segment(old, n) = src;
  };
  grow(r_, (prob.m2 - prob.c).array());
  grow(d_, prob.d.array());
  grow(w_, weight * w);
  grow(kappa_, kappa);
  base_ += weight * base;
}

double Objective::variable_part(double a) const {
  const Eigen::ArrayXd u = kappa_ * (r_ - d_ * a).square();
  if (quadratic_) return (w_ * u).sum();
  return -(w_ * (-u).exp()).sum();
}

double Objective::value(double a) const { return base_ + variable_part(a); }

double Objective::derivative(double a) const {
  const Eigen::ArrayXd delta = r_ - d_ * a;
  const Eigen::ArrayXd u = kappa_ * delta.square();
  const Eigen::ArrayXd dphi = quadratic_ ? Eigen::ArrayXd::Ones(u.size()) : Eigen::ArrayXd((-u).exp());
  return -(w_ * dphi * 2.0 * kappa_ * delta * d_).sum();
}

double Objective::curvature(double a, double h) const {
  return (variable_part(a + h) - 2.0 * variable_part(a) + variable_part(a - h)) / (h * h);
}

double Objective::closed_form_minimizer() const {
  if (!quadratic_) throw InvalidInput("closed form only exists for the log-BC objective");
  const Eigen::ArrayXd q = w_ * kappa_ * d_;
  const double den = (q * d_).sum();
  if (!(den > 0.0)) throw AllDZero();
  return (q * r_).sum() / den;
}

bool Objective::convex_at(double a) const {
  if (quadratic_) return true;
  const Eigen::ArrayXd delta = r_ - d_ * a;
  return ((2.0 * kappa_ * delta.square()) < 1.0).all();
}

double objective_eval(const CppProblem& prob, double a) { return Objective(prob).value(a); }

CppSolution solve_logbc_closed_form(const CppProblem& prob) {
  if (prob.divergence.type != DivergenceType::LogBC) {
    throw InvalidInput("closed form requires the log-BC divergence");
  }
  return closed_form_solution(Objective(prob));
}

CppSolution minimize_objective(const Objective& obj, double center, double half_width,
                               const CppConfig& cfg) {
  cfg.validate();
  if (!(half_width > 0.0) || !std::isfinite(half_width) || !std::isfinite(center)) {
    throw InvalidInput("search window must be finite with positive width");
  }
  GridScan g = scan(obj, center, half_width, cfg.grid_len);
  const int last = cfg.grid_len - 1;
  bool edge = g.best == 0 || g.best == last;
  double hw = half_width;
  if (edge) {
    hw *= 2.0;
    g = scan(obj, center, hw, cfg.grid_len);
    edge = g.best == 0 || g.best == last;
  }
  const double lo = g.a[static_cast<std::size_t>(std::max(g.best - 1, 0))];
  const double hi = g.a[static_cast<std::size_t>(std::min(g.best + 1, last))];
  double a = golden_section(obj, lo, hi, cfg.refine_tol);
  // Keep the grid point unless refinement strictly improves on it, so that
  // flat stretches resolve to the tie-broken grid point.
  const double grid_a = g.a[static_cast<std::size_t>(g.best)];
  if (!(obj.variable_part(a) < obj.variable_part(grid_a))) a = grid_a;

  CppSolution sol;
  sol.a_star = a;
  sol.objective_at_star = obj.value(a);
  sol.boundary = edge && (a <= g.a.front() + cfg.refine_tol || a >= g.a.back() - cfg.refine_tol);
  sol.converged = !sol.boundary;
  sol.convexity_ok = obj.convex_at(a);
  sol.curvature = obj.curvature(a, 1e-4 * hw);
  return sol;
}

CppSolution solve_1d(const CppProblem& prob, const CppConfig& cfg) {
  if (prob.divergence.type == DivergenceType::LogBC) {
    throw InvalidInput("solve_1d expects a Hellinger or DPD problem");
  }
  return minimize_objective(Objective(prob), prob.map_prediction,
                            cfg.window_sd * prob.sigma_hat, cfg);
}

CppSolution solve(const CppProblem& prob, const CppConfig& cfg) {
  if (prob.divergence.type == DivergenceType::LogBC) return solve_logbc_closed_form(prob);
  return solve_1d(prob, cfg);
}

ApproachIResult solve_approach_I(const ProblemBuilder& build,
                                 const std::vector<double>& sigma2_draws, const CppConfig& cfg) {
  return approach_I_impl<true>(build, sigma2_draws, cfg);
}

ApproachIResult solve_approach_I_serial(const ProblemBuilder& build,
                                        const std::vector<double>& sigma2_draws,
                                        const CppConfig& cfg) {
  return approach_I_impl<false>(build, sigma2_draws, cfg);
}

CppSolution solve_approach_II(const ProblemBuilder& build,
                              const std::vector<double>& sigma2_draws, const CppConfig& cfg) {
  cfg.validate();
  if (sigma2_draws.empty()) throw InvalidInput("no sigma^2 draws");
  const std::vector<double> draws = cfg.truncate_quantile
                                        ? truncate_draws(sigma2_draws, *cfg.truncate_quantile)
                                        : sigma2_draws;
  const double B = static_cast<double>(draws.size());
  std::vector<double> sigmas;
  for (double s2 : draws) sigmas.push_back(std::sqrt(s2));
  const double sigma_hat = shifted_mean(sigmas);

  // Repeated draws share one set of terms weighted by their multiplicity.
  std::vector<std::pair<std::size_t, std::size_t>> distinct;  // first index, count
  {
    std::map<double, std::size_t> slot;
    for (std::size_t t = 0; t < draws.size(); ++t) {
      const auto [it, fresh] = slot.try_emplace(draws[t], distinct.size());
      if (fresh) distinct.emplace_back(t, 0);
      ++distinct[it->second].second;
    }
  }

  Objective obj;
  double center = 0.0;
  for (std::size_t k = 0; k < distinct.size(); ++k) {
    const auto [t, count] = distinct[k];
    try {
      const CppProblem prob = build(draws[t]);
      if (k == 0) center = prob.map_prediction;
      obj.append(prob, static_cast<double>(count) / B);
    } catch (const std::exception& e) {
      throw DrawError(t, e.what());
    }
  }
  if (obj.quadratic()) return closed_form_solution(obj);
  return minimize_objective(obj, center, cfg.window_sd * sigma_hat, cfg);
}

std::vector<double> truncate_draws(const std::vector<double>& draws, double q) {
  if (draws.empty()) return draws;
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double cap = sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
  std::vector<double> out = draws;
  for (double& v : out) v = std::min(v, cap);
  return out;
}

double summarize(std::vector<double> values, Summary how) {
  if (values.empty()) throw InvalidInput("nothing to summarize");
  if (how == Summary::Mean) return shifted_mean(values);
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace cpred
