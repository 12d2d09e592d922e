#include "cpred/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cpred/errors.hpp"
#include "cpred/lab.hpp"

namespace cpred {

void SplitPlan::validate(Eigen::Index n) const {
  if (n_splits < 1) throw InvalidInput("n_splits must be positive");
  if (n_clean_test < 1) throw InvalidInput("n_clean_test must be positive");
  std::vector<Eigen::Index> o = outlier_indices;
  std::sort(o.begin(), o.end());
  if (std::adjacent_find(o.begin(), o.end()) != o.end()) throw InvalidInput("duplicate outlier index");
  for (Eigen::Index i : o) {
    if (i < 0 || i >= n) throw InvalidInput("outlier index " + std::to_string(i + 1) + " out of range");
  }
  const Eigen::Index clean = n - static_cast<Eigen::Index>(o.size());
  if (n_clean_test > clean) {
    throw InvalidInput("n_clean_test = " + std::to_string(n_clean_test) + " exceeds the " +
                       std::to_string(clean) + " clean rows");
  }
  if (n_clean_test == clean) throw InvalidInput("no clean rows left for training");
}

std::vector<Split> make_splits(Eigen::Index n, const SplitPlan& plan) {
  plan.validate(n);
  std::vector<Eigen::Index> outliers = plan.outlier_indices;
  std::sort(outliers.begin(), outliers.end());
  std::vector<Eigen::Index> clean;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::binary_search(outliers.begin(), outliers.end(), i)) clean.push_back(i);
  }
  std::vector<Split> splits;
  for (int s = 0; s < plan.n_splits; ++s) {
    std::mt19937_64 rng(derive_seed(plan.seed, static_cast<std::uint64_t>(s), 3));
    std::vector<Eigen::Index> pool = clean;
    std::shuffle(pool.begin(), pool.end(), rng);
    Split sp;
    sp.test = outliers;
    sp.test.insert(sp.test.end(), pool.begin(), pool.begin() + plan.n_clean_test);
    sp.train.assign(pool.begin() + plan.n_clean_test, pool.end());
    std::sort(sp.test.begin(), sp.test.end());
    std::sort(sp.train.begin(), sp.train.end());
    splits.push_back(std::move(sp));
  }
  return splits;
}

double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
}

std::vector<Eigen::Index> outliers_iqr(const Eigen::VectorXd& y, double k) {
  const std::vector<double> v(y.data(), y.data() + y.size());
  const double q1 = quantile_type7(v, 0.25);
  const double q3 = quantile_type7(v, 0.75);
  const double lo = q1 - k * (q3 - q1);
  const double hi = q3 + k * (q3 - q1);
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < lo || y(i) > hi) out.push_back(i);
  }
  return out;
}

Eigen::VectorXd studentized_residuals(const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p() + 1;
  if (n <= p + 1) throw InvalidInput("too few rows for studentized residuals");
  Eigen::MatrixXd Z(n, p);
  Z.col(0).setOnes();
  Z.rightCols(data.p()) = data.X;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  if (qr.rank() < p) throw InvalidInput("design for studentized residuals is rank deficient");
  const Eigen::VectorXd e = data.y - Z * qr.solve(data.y);
  const Eigen::MatrixXd ZtZ_inv = (Z.transpose() * Z).inverse();
  const double rss = e.squaredNorm();
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = Z.row(i).dot(ZtZ_inv * Z.row(i).transpose());
    const double s2_i = (rss - e(i) * e(i) / (1.0 - h)) / static_cast<double>(n - p - 1);
    t(i) = e(i) / std::sqrt(s2_i * (1.0 - h));
  }
  return t;
}

std::vector<Eigen::Index> outliers_studentized(const Dataset& data, double threshold) {
  const Eigen::VectorXd t = studentized_residuals(data);
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (std::abs(t(i)) > threshold) out.push_back(i);
  }
  return out;
}

std::vector<Eigen::Index> resolve_outliers(const std::string& spec, const Dataset& data) {
  if (spec == "iqr") return outliers_iqr(data.y);
  if (spec == "studentized") return outliers_studentized(data);
  std::vector<Eigen::Index> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || v < 1 || v > data.n()) {
      throw InvalidInput("bad outlier row '" + tok + "' (expected 1-based row numbers, iqr or studentized)");
    }
    out.push_back(static_cast<Eigen::Index>(v - 1));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cpred
