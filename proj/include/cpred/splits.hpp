#pragma once

// Repeated random-split protocol with held-out outliers, and the outlier
// rules used to pick them.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpred/conjugate.hpp"

namespace cpred {

struct SplitPlan {
  int n_splits = 10;
  std::vector<Eigen::Index> outlier_indices;  // 0-based; in every test set
  Eigen::Index n_clean_test = 18;
  std::uint64_t seed = 1;

  void validate(Eigen::Index n) const;
};

struct Split {
  std::vector<Eigen::Index> train;  // sorted
  std::vector<Eigen::Index> test;   // sorted
};

std::vector<Split> make_splits(Eigen::Index n, const SplitPlan& plan);

// Sample quantile, linear interpolation between order statistics (type 7).
double quantile_type7(std::vector<double> values, double q);

// Indices with y outside [Q1 - k IQR, Q3 + k IQR].
std::vector<Eigen::Index> outliers_iqr(const Eigen::VectorXd& y, double k = 1.5);

// Externally studentized residuals of an OLS fit with intercept.
Eigen::VectorXd studentized_residuals(const Dataset& data);
std::vector<Eigen::Index> outliers_studentized(const Dataset& data, double threshold = 2.5);

// "iqr", "studentized", or a comma-separated list of 1-based row numbers.
std::vector<Eigen::Index> resolve_outliers(const std::string& spec, const Dataset& data);

}  // namespace cpred
