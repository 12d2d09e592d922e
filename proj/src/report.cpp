#include "cpred/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "cpred/csv.hpp"
#include "cpred/errors.hpp"
#include "json.hpp"

namespace cpred {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

std::filesystem::path prepare_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + out_dir + "': " + ec.message());
  return dir;
}

void write_json(const json& j, const std::filesystem::path& p) {
  std::ofstream out = open_out(p);
  out << j.dump(2) << '\n';
  finish(out, p);
}

double parse_field(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidInput("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void emit_results(const ScenarioSummary& summary, const RunConfig& cfg, const std::string& out_dir) {
  const auto dir = prepare_dir(out_dir);
  json j;
  j["command"] = "simulate";
  j["config"] = json::parse(cfg.to_json_text());
  j["seed"] = cfg.seed;
  j["metrics"] = {{"mean_mlpd", summary.mean_mlpd}, {"se", summary.se},
                  {"ci_lower", summary.ci_lower},   {"ci_upper", summary.ci_upper},
                  {"pct_positive", summary.pct_positive}, {"n_ok", summary.n_ok},
                  {"n_failed", summary.n_failed}};
  json seeds = json::array();
  for (const ReplicateResult& r : summary.replicates) seeds.push_back(r.seed);
  j["replicate_seeds"] = seeds;
  write_json(j, dir / "summary.json");

  const auto rp = dir / "replicates.csv";
  std::ofstream rep = open_out(rp);
  rep << kReplicatesHeader << '\n';
  for (const ReplicateResult& r : summary.replicates) {
    rep << r.index << ',' << r.seed << ',' << (r.failed ? 1 : 0) << ',' << format_double(r.mlpd)
        << ',' << (r.cpp_positive ? 1 : 0) << ',' << format_double(r.a_star) << ','
        << format_double(r.map_pred) << ',' << format_double(r.mean_abs_shift) << ','
        << format_double(r.sigma_hat) << ',' << r.n_perturbed << ',' << r.boundary_draws << ','
        << r.nonconvex_draws << ',' << csv_escape(r.error) << '\n';
  }
  finish(rep, rp);

  const auto pp = dir / "plotdata_points.csv";
  std::ofstream pts = open_out(pp);
  pts << kPointsHeader << '\n';
  for (const ReplicateResult& r : summary.replicates) {
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      const PointRecord& p = r.points[k];
      pts << r.index << ',' << k << ',' << format_double(p.y) << ',' << format_double(p.truth) << ','
          << format_double(p.a_star) << ',' << format_double(p.map_pred) << ','
          << format_double(p.pred_var) << ',' << format_double(p.gain) << '\n';
    }
  }
  finish(pts, pp);
}

void emit_results(const SplitEvalReport& report, const RunConfig& cfg, const std::string& data_path,
                  const std::string& response, const std::vector<Eigen::Index>& outliers,
                  const std::string& out_dir) {
  const auto dir = prepare_dir(out_dir);
  json j;
  j["command"] = "split-eval";
  j["config"] = json::parse(cfg.to_json_text());
  j["seed"] = cfg.seed;
  j["data"] = data_path;
  j["response"] = response;
  json rows = json::array();
  for (Eigen::Index i : outliers) rows.push_back(i + 1);
  j["outlier_rows"] = rows;
  j["metrics"] = {{"mean_mlpd", report.mean_mlpd},     {"se", report.se},
                  {"n_positive", report.n_positive},   {"n_splits", report.splits.size()},
                  {"gain_clean", report.gain_clean},   {"gain_outlier", report.gain_outlier},
                  {"n_clean_obs", report.n_clean_obs}, {"n_outlier_obs", report.n_outlier_obs}};
  write_json(j, dir / "summary.json");

  const auto sp = dir / "splits.csv";
  std::ofstream s = open_out(sp);
  s << kSplitsHeader << '\n';
  for (const SplitRecord& r : report.splits) {
    s << r.split << ',' << r.n_train << ',' << r.n_test << ',' << format_double(r.mlpd) << ','
      << format_double(r.gain_clean) << ',' << format_double(r.gain_outlier) << '\n';
  }
  finish(s, sp);

  const auto gp = dir / "plotdata_gains.csv";
  std::ofstream g = open_out(gp);
  g << kGainsHeader << '\n';
  for (const ObservationGain& o : report.observations) {
    g << o.split << ',' << (o.row + 1) << ',' << (o.outlier ? 1 : 0) << ',' << format_double(o.y)
      << ',' << format_double(o.a_star) << ',' << format_double(o.map_pred) << ','
      << format_double(o.pred_var) << ',' << format_double(o.gain) << '\n';
  }
  finish(g, gp);
}

std::vector<ReplicateResult> read_replicates_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::string header;
  for (std::size_t k = 0; k < t.header.size(); ++k) header += (k ? "," : "") + t.header[k];
  if (header != kReplicatesHeader) throw InvalidInput("unexpected replicates.csv header");
  std::vector<ReplicateResult> out;
  for (const auto& row : t.rows) {
    ReplicateResult r;
    r.index = static_cast<int>(parse_field(row[0]));
    r.seed = std::stoull(row[1]);
    r.failed = row[2] == "1";
    r.mlpd = parse_field(row[3]);
    r.cpp_positive = row[4] == "1";
    r.a_star = parse_field(row[5]);
    r.map_pred = parse_field(row[6]);
    r.mean_abs_shift = parse_field(row[7]);
    r.sigma_hat = parse_field(row[8]);
    r.n_perturbed = std::stoull(row[9]);
    r.boundary_draws = std::stoull(row[10]);
    r.nonconvex_draws = std::stoull(row[11]);
    r.error = row[12];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cpred
