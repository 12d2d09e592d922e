#include "cpred/standardize.hpp"

#include <cmath>
#include <string>

#include "cpred/errors.hpp"

namespace cpred {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw InvalidInput("standardization needs at least two rows");
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  s.sd.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double ss = (X.col(j).array() - s.mean(j)).square().sum();
    s.sd(j) = std::sqrt(ss / static_cast<double>(X.rows() - 1));
    if (!(s.sd(j) > 0.0)) {
      throw InvalidInput("column " + std::to_string(j) + " has zero variance");
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) throw InvalidInput("standardizer width mismatch");
  return (X.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Eigen::VectorXd Standardizer::apply_row(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw InvalidInput("standardizer width mismatch");
  return (x - mean).array() / sd.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& Z) const {
  return (Z.array().rowwise() * sd.transpose().array()).matrix().rowwise() + mean.transpose();
}

std::pair<Dataset, Standardizer> standardize(const Dataset& data) {
  Standardizer s = Standardizer::fit(data.X);
  return {Dataset{s.apply(data.X), data.y}, s};
}

ScalarStandardizer ScalarStandardizer::fit(const Eigen::VectorXd& v) {
  if (v.size() < 2) throw InvalidInput("standardization needs at least two values");
  ScalarStandardizer s;
  s.mean = v.mean();
  s.sd = std::sqrt((v.array() - s.mean).square().sum() / static_cast<double>(v.size() - 1));
  if (!(s.sd > 0.0)) throw InvalidInput("response has zero variance");
  return s;
}

}  // namespace cpred
