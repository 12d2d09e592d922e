#include "cpred/divergences.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "cpred/errors.hpp"

namespace cpred {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_var(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("variance must be positive and finite");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("DPD alpha must be positive");
}

// -log BC for gap delta and variances (v1, v2).
double neg_log_bc_gap(double delta, double v1, double v2) {
  const double S = v1 + v2;
  // log of sqrt(2 s1 s2 / S) written with logs of the variances.
  const double log_c = 0.5 * (std::log(2.0) + 0.5 * (std::log(v1) + std::log(v2)) - std::log(S));
  return -log_c + delta * delta / (4.0 * S);
}

double hellinger_c(double v1, double v2) {
  return std::sqrt(2.0 * std::sqrt(v1 * v2) / (v1 + v2));
}

// Constant K in int g f^a = K exp(-kappa delta^2), g ~ var v1, f ~ var v2.
double dpd_cross_constant(double v1, double v2, double alpha) {
  return std::pow(kTwoPi * v2, -0.5 * alpha) * std::sqrt(v2 / (alpha * v1 + v2));
}

}  // namespace

void GaussianLaw::validate() const {
  if (!std::isfinite(mean)) throw InvalidInput("Gaussian mean must be finite");
  check_var(var);
}

void DivergenceKind::validate() const {
  if (type == DivergenceType::DPD) check_alpha(alpha);
}

std::string DivergenceKind::name() const {
  switch (type) {
    case DivergenceType::LogBC:
      return "logbc";
    case DivergenceType::Hellinger:
      return "hellinger";
    case DivergenceType::DPD:
      return "dpd";
  }
  return "unknown";
}

DivergenceKind parse_divergence(const std::string& name, double alpha) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "logbc" || s == "log-bc" || s == "bhattacharyya") return DivergenceKind::logbc();
  if (s == "hellinger") return DivergenceKind::hellinger();
  if (s == "dpd") {
    check_alpha(alpha);
    return DivergenceKind::dpd(alpha);
  }
  throw InvalidInput("unknown divergence '" + name + "'");
}

double bhattacharyya_coefficient(const GaussianLaw& p, const GaussianLaw& q) {
  return std::exp(-neg_log_bc(p, q));
}

double neg_log_bc(const GaussianLaw& p, const GaussianLaw& q) {
  p.validate();
  q.validate();
  return neg_log_bc_gap(p.mean - q.mean, p.var, q.var);
}

double hellinger_sq(const GaussianLaw& p, const GaussianLaw& q) {
  return -std::expm1(-neg_log_bc(p, q));
}

double gaussian_power_integral(double var, double alpha) {
  return std::pow(kTwoPi * var, -0.5 * alpha) / std::sqrt(1.0 + alpha);
}

double dpd(const GaussianLaw& p, const GaussianLaw& q, double alpha) {
  p.validate();
  q.validate();
  check_alpha(alpha);
  const double delta = p.mean - q.mean;
  const double cross = dpd_cross_constant(p.var, q.var, alpha) *
                       std::exp(-dpd_kappa(p.var, q.var, alpha) * delta * delta);
  const double value = gaussian_power_integral(q.var, alpha) - (1.0 + 1.0 / alpha) * cross +
                       gaussian_power_integral(p.var, alpha) / alpha;
  return std::max(value, 0.0);
}

double kl_gaussian(const GaussianLaw& p, const GaussianLaw& q) {
  p.validate();
  q.validate();
  const double r = p.var / q.var;
  const double delta = p.mean - q.mean;
  return 0.5 * (r - 1.0 - std::log(r) + delta * delta / q.var);
}

double dpd_kappa(double s1_sq, double s2_sq, double alpha) {
  return alpha / (2.0 * (s2_sq + alpha * s1_sq));
}

double term_divergence(const DivergenceKind& kind, double delta, double s1_sq, double s2_sq) {
  check_var(s1_sq);
  check_var(s2_sq);
  switch (kind.type) {
    case DivergenceType::LogBC:
      return neg_log_bc_gap(delta, s1_sq, s2_sq);
    case DivergenceType::Hellinger:
      return -std::expm1(-neg_log_bc_gap(delta, s1_sq, s2_sq));
    case DivergenceType::DPD:
      return dpd({0.0, s1_sq}, {delta, s2_sq}, kind.alpha);
  }
  return 0.0;
}

double score_logbc(double delta, double s1_sq, double s2_sq) {
  check_var(s1_sq);
  check_var(s2_sq);
  return delta / (2.0 * (s1_sq + s2_sq));
}

double score_hellinger(double delta, double s1_sq, double s2_sq) {
  check_var(s1_sq);
  check_var(s2_sq);
  const double S = s1_sq + s2_sq;
  return hellinger_c(s1_sq, s2_sq) * delta / (2.0 * S) * std::exp(-delta * delta / (4.0 * S));
}

double score_dpd(double delta, double s1_sq, double s2_sq, double alpha) {
  check_var(s1_sq);
  check_var(s2_sq);
  check_alpha(alpha);
  const double kappa = dpd_kappa(s1_sq, s2_sq, alpha);
  return (1.0 + 1.0 / alpha) * dpd_cross_constant(s1_sq, s2_sq, alpha) * 2.0 * kappa * delta *
         std::exp(-kappa * delta * delta);
}

double score(const DivergenceKind& kind, double delta, double s1_sq, double s2_sq) {
  switch (kind.type) {
    case DivergenceType::LogBC:
      return score_logbc(delta, s1_sq, s2_sq);
    case DivergenceType::Hellinger:
      return score_hellinger(delta, s1_sq, s2_sq);
    case DivergenceType::DPD:
      return score_dpd(delta, s1_sq, s2_sq, kind.alpha);
  }
  return 0.0;
}

double convexity_radius(const DivergenceKind& kind, double s1_sq, double s2_sq) {
  check_var(s1_sq);
  check_var(s2_sq);
  switch (kind.type) {
    case DivergenceType::LogBC:
      return std::numeric_limits<double>::infinity();
    case DivergenceType::Hellinger:
      return std::sqrt(2.0 * (s1_sq + s2_sq));
    case DivergenceType::DPD:
      check_alpha(kind.alpha);
      return 1.0 / std::sqrt(2.0 * dpd_kappa(s1_sq, s2_sq, kind.alpha));
  }
  return 0.0;
}

double score_bound(const DivergenceKind& kind, double s1_sq, double s2_sq) {
  check_var(s1_sq);
  check_var(s2_sq);
  switch (kind.type) {
    case DivergenceType::LogBC:
      return kUnbounded;
    case DivergenceType::Hellinger: {
      const double S = s1_sq + s2_sq;
      return hellinger_c(s1_sq, s2_sq) / (2.0 * S) * std::sqrt(2.0 * S / std::numbers::e);
    }
    case DivergenceType::DPD: {
      check_alpha(kind.alpha);
      const double kappa = dpd_kappa(s1_sq, s2_sq, kind.alpha);
      return (1.0 + 1.0 / kind.alpha) * dpd_cross_constant(s1_sq, s2_sq, kind.alpha) *
             std::sqrt(2.0 * kappa / std::numbers::e);
    }
  }
  return 0.0;
}

}  // namespace cpred
