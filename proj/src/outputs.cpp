#include "maploc/errors.hpp"
#include "maploc/harness.hpp"

#include <cstdio>
#include <fstream>

namespace maploc {
namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DomainError("cannot write " + path.string());
  }
  out << text;
}

}  // namespace

std::string trajectory_csv(std::span<const StepRecord> steps) {
  std::string s = "step,truth_x,truth_y,est_x,est_y,error_m,mode,mpc_count\n";
  for (const auto& r : steps) {
    s += std::to_string(r.step) + ',' + fixed(r.truth.x()) + ',' + fixed(r.truth.y()) + ',' +
         fixed(r.estimate.x()) + ',' + fixed(r.estimate.y()) + ',' + fixed(r.error) + ',' + to_string(r.mode) +
         ',' + std::to_string(r.mpc_count) + '\n';
  }
  return s;
}

std::string cdf_csv(std::span<const CdfPoint> cdf) {
  std::string s = "error_m,probability\n";
  for (const auto& [e, p] : cdf) {
    s += fixed(e) + ',' + fixed(p) + '\n';
  }
  return s;
}

nlohmann::json summary_json(const RunSummary& summary) {
  return {{"steps", summary.steps},
          {"mean_error_m", summary.mean_error},
          {"median_error_m", summary.median_error},
          {"max_error_m", summary.max_error},
          {"los_mean_error_m", summary.los_mean_error},
          {"nlos_mean_error_m", summary.nlos_mean_error},
          {"multi_mpc_steps", summary.multi_mpc_steps},
          {"mapat_only_mean_m", summary.mapat_only_mean},
          {"ekf_mean_m", summary.ekf_mean}};
}

void emit_outputs(const MonteCarloResult& result, const BaselineComparison& baseline,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : result.runs) {
    write_file(out_dir / ("trajectory_" + std::to_string(run.seed) + ".csv"), trajectory_csv(run.steps));
    auto j = summary_json(run.summary);
    j["seed"] = run.seed;
    runs.push_back(std::move(j));
  }
  write_file(out_dir / "cdf.csv", cdf_csv(result.aggregate.cdf));

  nlohmann::json doc;
  doc["aggregate"] = summary_json(result.aggregate);
  doc["baseline"] = {{"pairs", baseline.pairs.size()},
                     {"mapat_only_mean_m", baseline.mapat_only_mean},
                     {"ekf_mean_m", baseline.ekf_mean}};
  doc["runs"] = std::move(runs);
  write_file(out_dir / "summary.json", doc.dump(2) + "\n");
}

}  // namespace maploc
