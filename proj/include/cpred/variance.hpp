#pragma once

// Noise-variance posterior under the Normal-Inverse-Gamma prior
//   sigma^2 ~ IG(a0, b0),  beta | sigma^2 ~ N(beta0, sigma^2 V).

#include <cstdint>
#include <vector>

#include "cpred/conjugate.hpp"

namespace cpred {

struct InverseGammaParams {
  double shape = 0.0;
  double scale = 0.0;

  double mean() const;  // scale / (shape - 1), requires shape > 1
};

// IG(a0 + n/2, b0 + (y'y + beta0'V^{-1}beta0 - b'A^{-1}b) / 2).
InverseGammaParams sigma2_posterior(const Dataset& data, const PriorSpec& prior,
                                    const PosteriorState& state, double a0, double b0);

std::vector<double> draw_inverse_gamma(const InverseGammaParams& ig, std::size_t n_draws,
                                       std::uint64_t seed);

std::vector<double> draw_sigma2_posterior(const Dataset& data, const PriorSpec& prior, double a0,
                                          double b0, std::size_t n_draws, std::uint64_t seed);

}  // namespace cpred
