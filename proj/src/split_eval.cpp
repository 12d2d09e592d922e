#include "cpred/split_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpred/errors.hpp"
#include "cpred/standardize.hpp"
#include "cpred/variance.hpp"

namespace cpred {

SplitEvalReport split_eval(const Dataset& data, const SplitPlan& plan, const SplitEvalConfig& cfg) {
  data.validate();
  cfg.divergence.validate();
  cfg.cpp.validate();
  const std::vector<Split> splits = make_splits(data.n(), plan);
  std::vector<Eigen::Index> outliers = plan.outlier_indices;
  std::sort(outliers.begin(), outliers.end());

  SplitEvalReport rep;
  double pooled_clean = 0.0;
  double pooled_outlier = 0.0;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    const Split& sp = splits[s];
    try {
      const Dataset train_raw = data.subset(sp.train);
      const Dataset test_raw = data.subset(sp.test);
      const Standardizer sx = Standardizer::fit(train_raw.X);
      const ScalarStandardizer sy = ScalarStandardizer::fit(train_raw.y);
      const Dataset train{sx.apply(train_raw.X), sy.apply(train_raw.y)};
      const Dataset test{sx.apply(test_raw.X), sy.apply(test_raw.y)};

      const PriorSpec prior = PriorSpec::isotropic(train.p(), cfg.v_scale);
      const PosteriorState state = fit_posterior(train, prior);
      const std::vector<double> draws =
          draw_inverse_gamma(sigma2_posterior(train, prior, state, cfg.a0, cfg.b0), cfg.n_draws,
                             derive_seed(cfg.seed, s, 2));

      SplitRecord rec;
      rec.split = static_cast<int>(s);
      rec.n_train = sp.train.size();
      rec.n_test = sp.test.size();
      std::size_t n_clean = 0;
      std::size_t n_out = 0;
      for (Eigen::Index k = 0; k < test.n(); ++k) {
        const CppPrediction pr = predict_unknown_variance(
            state, train, test.X.row(k).transpose(), draws, cfg.divergence, cfg.cpp, cfg.approach);
        ObservationGain og;
        og.split = rec.split;
        og.row = sp.test[static_cast<std::size_t>(k)];
        og.outlier = std::binary_search(outliers.begin(), outliers.end(), og.row);
        og.y = test.y(k);
        og.a_star = pr.a_star;
        og.map_pred = pr.map_pred;
        og.pred_var = pr.pred_var;
        og.gain = log_normal_density(og.y, {og.a_star, og.pred_var}) -
                  log_normal_density(og.y, {og.map_pred, og.pred_var});
        rec.mlpd += og.gain;
        if (og.outlier) {
          rec.gain_outlier += og.gain;
          ++n_out;
        } else {
          rec.gain_clean += og.gain;
          ++n_clean;
        }
        rep.observations.push_back(og);
      }
      pooled_clean += rec.gain_clean;
      pooled_outlier += rec.gain_outlier;
      rep.n_clean_obs += n_clean;
      rep.n_outlier_obs += n_out;
      rec.mlpd /= static_cast<double>(test.n());
      if (n_clean) rec.gain_clean /= static_cast<double>(n_clean);
      if (n_out) rec.gain_outlier /= static_cast<double>(n_out);
      if (rec.mlpd > 0.0) ++rep.n_positive;
      rep.splits.push_back(rec);
    } catch (const std::exception& e) {
      throw Error("split " + std::to_string(s) + ": " + e.what());
    }
  }

  const double m = static_cast<double>(rep.splits.size());
  for (const SplitRecord& r : rep.splits) rep.mean_mlpd += r.mlpd / m;
  if (rep.splits.size() > 1) {
    double ss = 0.0;
    for (const SplitRecord& r : rep.splits) ss += (r.mlpd - rep.mean_mlpd) * (r.mlpd - rep.mean_mlpd);
    rep.se = std::sqrt(ss / (m - 1.0) / m);
  }
  if (rep.n_clean_obs) rep.gain_clean = pooled_clean / static_cast<double>(rep.n_clean_obs);
  if (rep.n_outlier_obs) rep.gain_outlier = pooled_outlier / static_cast<double>(rep.n_outlier_obs);
  return rep;
}

}  // namespace cpred
