#include "cpred/basis.hpp"

#include <cmath>
#include <iostream>

#include "cpred/errors.hpp"

namespace cpred {

namespace {

const std::vector<double>& knots_for(const BasisSpec& basis, Eigen::Index coord) {
  static const std::vector<double> none;
  if (basis.knots.empty()) return none;
  if (basis.knots.size() == 1) return basis.knots.front();
  if (static_cast<std::size_t>(coord) >= basis.knots.size()) {
    throw InvalidInput("spline basis: no knots given for input column " + std::to_string(coord));
  }
  return basis.knots[static_cast<std::size_t>(coord)];
}

void check(const BasisSpec& basis) {
  if (basis.kind != BasisSpec::Kind::Identity && basis.degree < 1) {
    throw InvalidInput("basis degree must be at least 1");
  }
}

}  // namespace

BasisSpec BasisSpec::identity() { return {}; }

BasisSpec BasisSpec::polynomial(int degree, bool intercept) {
  BasisSpec b;
  b.kind = Kind::Polynomial;
  b.degree = degree;
  b.intercept = intercept;
  return b;
}

BasisSpec BasisSpec::spline(int degree, std::vector<std::vector<double>> knots, bool intercept) {
  BasisSpec b;
  b.kind = Kind::Spline;
  b.degree = degree;
  b.knots = std::move(knots);
  b.intercept = intercept;
  return b;
}

Eigen::Index basis_size(Eigen::Index q, const BasisSpec& basis) {
  check(basis);
  switch (basis.kind) {
    case BasisSpec::Kind::Identity:
      return q;
    case BasisSpec::Kind::Polynomial:
      return (basis.intercept ? 1 : 0) + q * basis.degree;
    case BasisSpec::Kind::Spline: {
      Eigen::Index k = basis.intercept ? 1 : 0;
      for (Eigen::Index j = 0; j < q; ++j) {
        k += basis.degree + static_cast<Eigen::Index>(knots_for(basis, j).size());
      }
      return k;
    }
  }
  return q;
}

Eigen::VectorXd basis_expand_row(const Eigen::VectorXd& x, const BasisSpec& basis) {
  if (basis.kind == BasisSpec::Kind::Identity) return x;
  Eigen::VectorXd z(basis_size(x.size(), basis));
  Eigen::Index k = 0;
  if (basis.intercept) z(k++) = 1.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double power = 1.0;
    for (int d = 1; d <= basis.degree; ++d) {
      power *= x(j);
      z(k++) = power;
    }
    if (basis.kind == BasisSpec::Kind::Spline) {
      for (double knot : knots_for(basis, j)) {
        const double t = x(j) - knot;
        z(k++) = t > 0.0 ? std::pow(t, basis.degree) : 0.0;
      }
    }
  }
  return z;
}

bool basis_ill_posed(Eigen::Index n, Eigen::Index q, const BasisSpec& basis) {
  return basis_size(q, basis) > n;
}

Eigen::MatrixXd basis_expand(const Eigen::MatrixXd& X_raw, const BasisSpec& basis) {
  if (basis.kind == BasisSpec::Kind::Identity) return X_raw;
  const Eigen::Index K = basis_size(X_raw.cols(), basis);
  if (K > X_raw.rows()) {
    std::cerr << "warning: ill-posed basis, " << K << " features for " << X_raw.rows()
              << " observations\n";
  }
  Eigen::MatrixXd Z(X_raw.rows(), K);
  for (Eigen::Index i = 0; i < X_raw.rows(); ++i) {
    Z.row(i) = basis_expand_row(X_raw.row(i).transpose(), basis).transpose();
  }
  return Z;
}

BasisSpec::Kind parse_basis_kind(const std::string& name) {
  if (name == "identity") return BasisSpec::Kind::Identity;
  if (name == "polynomial") return BasisSpec::Kind::Polynomial;
  if (name == "spline") return BasisSpec::Kind::Spline;
  throw InvalidInput("unknown basis '" + name + "'");
}

}  // namespace cpred
