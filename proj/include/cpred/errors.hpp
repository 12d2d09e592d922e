#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpred {

// Base class for every numerical failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes, non-finite inputs, out-of-range configuration.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// Leverage l_i = x_i' A^{-1} x_i too close to 1: the LOO variance diverges.
class DegenerateLeverage : public Error {
 public:
  explicit DegenerateLeverage(std::size_t i)
      : Error("degenerate leverage at observation " + std::to_string(i)), index(i) {}
  std::size_t index;
};

// 1 + x_new' B_i x_new <= guard in the second Woodbury step.
class DegenerateAugmentation : public Error {
 public:
  explicit DegenerateAugmentation(std::size_t i)
      : Error("degenerate augmentation at observation " + std::to_string(i)), index(i) {}
  std::size_t index;
};

// [Sigma_n^{-1}]_ii too small for the GP leave-one-out identities.
class DegenerateLoo : public Error {
 public:
  explicit DegenerateLoo(std::size_t i)
      : Error("degenerate GP leave-one-out at observation " + std::to_string(i)), index(i) {}
  std::size_t index;
};

// Every swap slope d_i is zero, so the objective does not depend on a.
class AllDZero : public Error {
 public:
  AllDZero() : Error("every swap slope d_i is zero; objective is constant in a") {}
};

// Failure inside one posterior draw of an Approach I / II solve.
class DrawError : public Error {
 public:
  DrawError(std::size_t draw, const std::string& what)
      : Error("draw " + std::to_string(draw) + ": " + what), draw_index(draw) {}
  std::size_t draw_index;
};

}  // namespace cpred
