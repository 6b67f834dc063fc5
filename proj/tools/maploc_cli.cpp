// maploc: map-assisted AoA/ToF positioning and EKF tracking simulator.
//
//   maploc run --scenario data/reference_scenario.json --seeds 100 --out results/
//   maploc baseline --scenario data/reference_scenario.json
//   maploc trace --map data/reference_map.json --bs -20,-10 --ue 10,18

#include "maploc/errors.hpp"
#include "maploc/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

maploc::Point2 parse_xy(const std::string& text) {
  std::istringstream in(text);
  double x = 0.0;
  double y = 0.0;
  char comma = 0;
  if (!(in >> x >> comma >> y) || comma != ',' || !(in >> std::ws).eof()) {
    throw maploc::DomainError("expected x,y but got '" + text + "'");
  }
  return {x, y};
}

struct Overrides {
  std::optional<double> sigma_tof_ns;
  std::optional<double> sigma_aoa_deg;
  std::optional<double> cluster_radius_m;

  void add_to(CLI::App* app) {
    app->add_option("--sigma-tof-ns", sigma_tof_ns, "ToF noise standard deviation [ns]");
    app->add_option("--sigma-aoa-deg", sigma_aoa_deg, "AoA noise standard deviation [deg]");
    app->add_option("--cluster-radius-m", cluster_radius_m, "MAP-AT cluster radius [m]");
  }

  void apply(maploc::ScenarioConfig& c) const {
    if (sigma_tof_ns) {
      c.noise.sigma_tof = *sigma_tof_ns * 1e-9;
    }
    if (sigma_aoa_deg) {
      c.noise.sigma_aoa = maploc::deg_to_rad(*sigma_aoa_deg);
    }
    if (cluster_radius_m) {
      c.cluster_radius = *cluster_radius_m;
    }
    maploc::validate(c);
  }
};

nlohmann::json path_json(const maploc::PropagationPath& p) {
  nlohmann::json interactions = nlohmann::json::array();
  for (const auto& i : p.interactions) {
    interactions.push_back({{"kind", maploc::to_string(i.kind)}, {"wall", i.wall}, {"point", {i.point.x(), i.point.y()}}});
  }
  return {{"length_m", p.length},
          {"tof_ns", p.length / maploc::kSpeedOfLight * 1e9},
          {"aoa_deg", maploc::rad_to_deg(p.aoa_at_bs)},
          {"path_gain_db", p.path_gain_db},
          {"interactions", std::move(interactions)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map-assisted AoA/ToF positioning with EKF tracking"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::size_t seeds = 0;
  std::string out_dir;
  Overrides run_overrides;
  auto* run = app.add_subcommand("run", "Monte-Carlo run of a scenario; writes CSV/JSON results");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Number of Monte-Carlo seeds (default: scenario's monte_carlo_runs)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run_overrides.add_to(run);

  Overrides baseline_overrides;
  auto* baseline = app.add_subcommand("baseline", "Compare MAP-AT alone with MAP-AT + EKF on multi-MPC steps");
  baseline->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  baseline->add_option("--seeds", seeds, "Number of Monte-Carlo seeds");
  baseline_overrides.add_to(baseline);

  std::string map_path;
  std::string bs_text;
  std::string ue_text;
  maploc::TraceLimits limits;
  auto* trace = app.add_subcommand("trace", "Dump the propagation paths between two points");
  trace->add_option("--map", map_path, "Map JSON file")->required()->check(CLI::ExistingFile);
  trace->add_option("--bs", bs_text, "BS position x,y [m]")->required();
  trace->add_option("--ue", ue_text, "UE position x,y [m]")->required();
  trace->add_option("--max-reflections", limits.max_reflections, "Reflection budget");
  trace->add_option("--max-transmissions", limits.max_transmissions, "Transmission budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (*run || *baseline) {
      auto config = maploc::load_scenario(scenario_path);
      (*run ? run_overrides : baseline_overrides).apply(config);
      const std::size_t n = seeds > 0 ? seeds : config.monte_carlo_runs;
      const auto scenario = maploc::prepare_scenario(std::move(config));
      const auto mc = maploc::run_monte_carlo(scenario, n);
      const auto cmp = maploc::mapat_only_baseline(mc.runs);
      if (*run) {
        maploc::emit_outputs(mc, cmp, out_dir);
        std::cout << maploc::summary_json(mc.aggregate).dump(2) << "\n";
      } else {
        nlohmann::json doc = {{"pairs", cmp.pairs.size()},
                              {"mapat_only_mean_m", cmp.mapat_only_mean},
                              {"ekf_mean_m", cmp.ekf_mean}};
        std::cout << doc.dump(2) << "\n";
      }
    } else if (*trace) {
      const auto map = maploc::load_map(map_path);
      const auto paths = maploc::trace_paths(map, parse_xy(bs_text), parse_xy(ue_text), limits);
      nlohmann::json doc = nlohmann::json::array();
      for (const auto& p : paths) {
        doc.push_back(path_json(p));
      }
      std::cout << doc.dump(2) << "\n";
    }
  } catch (const maploc::DomainError& e) {
    std::cerr << nlohmann::json{{"error", "input"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
