#include "cpred/variance.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cpred/errors.hpp"

namespace cpred {

double InverseGammaParams::mean() const {
  if (!(shape > 1.0)) throw InvalidInput("inverse-gamma mean needs shape > 1");
  return scale / (shape - 1.0);
}

InverseGammaParams sigma2_posterior(const Dataset& data, const PriorSpec& prior,
                                    const PosteriorState& state, double a0, double b0) {
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw InvalidInput("inverse-gamma hyperparameters must be positive");
  const double quad = data.y.squaredNorm() + prior.beta0.dot(state.Vinv * prior.beta0) -
                      state.b.dot(state.beta_hat);
  InverseGammaParams ig;
  ig.shape = a0 + 0.5 * static_cast<double>(data.n());
  // quad is a sum of squares up to rounding.
  ig.scale = b0 + 0.5 * std::max(quad, 0.0);
  return ig;
}

std::vector<double> draw_inverse_gamma(const InverseGammaParams& ig, std::size_t n_draws,
                                       std::uint64_t seed) {
  if (!(ig.shape > 0.0) || !(ig.scale > 0.0) || !std::isfinite(ig.shape) ||
      !std::isfinite(ig.scale)) {
    throw InvalidInput("inverse-gamma shape and scale must be positive");
  }
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(ig.shape, 1.0 / ig.scale);
  std::vector<double> out(n_draws);
  for (double& v : out) v = 1.0 / gamma(rng);
  return out;
}

std::vector<double> draw_sigma2_posterior(const Dataset& data, const PriorSpec& prior, double a0,
                                          double b0, std::size_t n_draws, std::uint64_t seed) {
  const PosteriorState state = fit_posterior(data, prior);
  return draw_inverse_gamma(sigma2_posterior(data, prior, state, a0, b0), n_draws, seed);
}

}  // namespace cpred
