#pragma once

#include <Eigen/Dense>

#include "cpred/conjugate.hpp"

namespace cpred {

// Column-wise affine map z = (x - mean) / sd with the sample sd (n - 1),
// fitted on training rows and reused unchanged on held-out rows.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  // Throws InvalidInput on a zero-variance column.
  static Standardizer fit(const Eigen::MatrixXd& X);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply_row(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& Z) const;
};

// Standardizes the covariates only; the response is left as is.
std::pair<Dataset, Standardizer> standardize(const Dataset& data);

// Scalar version for a response vector.
struct ScalarStandardizer {
  double mean = 0.0;
  double sd = 1.0;

  static ScalarStandardizer fit(const Eigen::VectorXd& v);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return (v.array() - mean) / sd;
  }
  double apply(double v) const { return (v - mean) / sd; }
};

}  // namespace cpred
