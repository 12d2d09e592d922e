#pragma once

// Fixed feature maps z_i = phi(x_i).  The expanded matrix is an ordinary
// design for the conjugate model.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cpred {

struct BasisSpec {
  enum class Kind { Identity, Polynomial, Spline };

  Kind kind = Kind::Identity;
  int degree = 1;
  // Spline only: knots per input coordinate.  A single entry is reused for
  // every coordinate.
  std::vector<std::vector<double>> knots;
  // Polynomial and spline bases prepend a constant column.
  bool intercept = true;

  static BasisSpec identity();
  static BasisSpec polynomial(int degree, bool intercept = true);
  static BasisSpec spline(int degree, std::vector<std::vector<double>> knots,
                          bool intercept = true);
};

// Number of output columns for q input columns.
Eigen::Index basis_size(Eigen::Index q, const BasisSpec& basis);

Eigen::VectorXd basis_expand_row(const Eigen::VectorXd& x, const BasisSpec& basis);

// Logs a warning on stderr when the feature count exceeds n (the prior still
// regularizes the fit).
Eigen::MatrixXd basis_expand(const Eigen::MatrixXd& X_raw, const BasisSpec& basis);

// True when basis_size exceeds the number of rows.
bool basis_ill_posed(Eigen::Index n, Eigen::Index q, const BasisSpec& basis);

BasisSpec::Kind parse_basis_kind(const std::string& name);

}  // namespace cpred
