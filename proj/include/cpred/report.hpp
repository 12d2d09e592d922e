#pragma once

// Result files.  Column orders are fixed; the header strings below are the
// documented schemas.

#include <string>
#include <vector>

#include "cpred/config.hpp"
#include "cpred/lab.hpp"
#include "cpred/split_eval.hpp"

namespace cpred {

inline constexpr const char* kReplicatesHeader =
    "replicate,seed,failed,mlpd,cpp_positive,a_star,map_pred,mean_abs_shift,sigma_hat,"
    "n_perturbed,boundary_draws,nonconvex_draws,error";
inline constexpr const char* kPointsHeader =
    "replicate,point,y,truth,a_star,map_pred,pred_var,gain";
inline constexpr const char* kSplitsHeader =
    "split,n_train,n_test,mlpd,gain_clean,gain_outlier";
inline constexpr const char* kGainsHeader =
    "split,row,outlier,y,a_star,map_pred,pred_var,gain";

// summary.json, replicates.csv, plotdata_points.csv
void emit_results(const ScenarioSummary& summary, const RunConfig& cfg, const std::string& out_dir);
// summary.json, splits.csv, plotdata_gains.csv
void emit_results(const SplitEvalReport& report, const RunConfig& cfg, const std::string& data_path,
                  const std::string& response, const std::vector<Eigen::Index>& outliers,
                  const std::string& out_dir);

// Inverse of the replicates.csv writer (points are not restored).
std::vector<ReplicateResult> read_replicates_csv(const std::string& path);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace cpred
