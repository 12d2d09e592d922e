#pragma once

// Closed-form divergences between univariate Gaussian laws, their scores in
// the mean gap and the associated bounds and convexity radii.
//
// Per-term conventions used by the objective: the gap is
// delta = m2 - m1 (LOO mean minus swapped mean), s1_sq is the swapped
// variance and s2_sq the LOO variance.  Every score g returned here is the
// derivative of the per-term divergence with respect to delta.

#include <limits>
#include <string>

namespace cpred {

struct GaussianLaw {
  double mean = 0.0;
  double var = 1.0;

  void validate() const;
};

enum class DivergenceType { LogBC, Hellinger, DPD };

struct DivergenceKind {
  DivergenceType type = DivergenceType::DPD;
  double alpha = 1.0;  // DPD only

  static DivergenceKind logbc() { return {DivergenceType::LogBC, 0.0}; }
  static DivergenceKind hellinger() { return {DivergenceType::Hellinger, 0.0}; }
  static DivergenceKind dpd(double alpha) { return {DivergenceType::DPD, alpha}; }

  void validate() const;
  std::string name() const;  // "logbc", "hellinger" or "dpd"
};

// Accepts "logbc", "hellinger", "dpd" (case-insensitive).
DivergenceKind parse_divergence(const std::string& name, double alpha = 1.0);

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

double bhattacharyya_coefficient(const GaussianLaw& p, const GaussianLaw& q);
double neg_log_bc(const GaussianLaw& p, const GaussianLaw& q);
double hellinger_sq(const GaussianLaw& p, const GaussianLaw& q);
// Basu et al. form d_alpha(p, q) with p in the role of the data law:
//   int q^{1+a} - (1 + 1/a) int p q^a + (1/a) int p^{1+a}.
// Tends to KL(p || q) as alpha -> 0.
double dpd(const GaussianLaw& p, const GaussianLaw& q, double alpha);
double kl_gaussian(const GaussianLaw& p, const GaussianLaw& q);

// Integral of N(mu, var)^{1+alpha} over the real line.
double gaussian_power_integral(double var, double alpha);

// Per-term CPP divergence between the swapped law N(m1, s1_sq) and the LOO
// law N(m2, s2_sq) as a function of the gap.
double term_divergence(const DivergenceKind& kind, double delta, double s1_sq, double s2_sq);

double score_logbc(double delta, double s1_sq, double s2_sq);
double score_hellinger(double delta, double s1_sq, double s2_sq);
double score_dpd(double delta, double s1_sq, double s2_sq, double alpha);
double score(const DivergenceKind& kind, double delta, double s1_sq, double s2_sq);

// kappa_i = alpha / (2 (s2_sq + alpha s1_sq)).
double dpd_kappa(double s1_sq, double s2_sq, double alpha);

// Half-width of the gap interval on which the per-term divergence is convex.
// +infinity for LogBC.
double convexity_radius(const DivergenceKind& kind, double s1_sq, double s2_sq);

// sup_delta |g(delta)|; kUnbounded for LogBC.
double score_bound(const DivergenceKind& kind, double s1_sq, double s2_sq);

}  // namespace cpred
