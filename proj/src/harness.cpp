#include "maploc/harness.hpp"

#include "maploc/anchors.hpp"
#include "maploc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace maploc {
namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const CandidateLocation& nearest_candidate(const std::vector<CandidateLocation>& candidates, const Point2& target) {
  return *std::min_element(candidates.begin(), candidates.end(), [&](const auto& l, const auto& r) {
    return (l.position - target).squaredNorm() < (r.position - target).squaredNorm();
  });
}

struct ResolvedMpc {
  const MpcMeasurement* mpc;
  const CandidateLocation* path;
};

const MpcMeasurement& find_mpc(const std::vector<MpcMeasurement>& mpcs, int id) {
  const auto it = std::find_if(mpcs.begin(), mpcs.end(), [id](const auto& m) { return m.id == id; });
  return *it;
}

}  // namespace

const char* to_string(StepMode mode) {
  switch (mode) {
    case StepMode::MapAtFix:
      return "mapat_fix";
    case StepMode::SingleMpcUpdate:
      return "single_mpc_update";
    case StepMode::Outage:
      return "outage";
  }
  return "unknown";
}

Scenario prepare_scenario(ScenarioConfig config) {
  MapModel map = load_map(config.map_path);
  return prepare_scenario(std::move(config), std::move(map));
}

Scenario prepare_scenario(ScenarioConfig config, MapModel map) {
  validate(config);
  Scenario s{std::move(config), std::move(map), {}, {}, {}};
  s.motion = build_motion_model(s.config);
  for (const auto& w : s.config.waypoints) {
    auto paths = trace_paths(s.map, s.config.bs, w, s.config.tracer.limits);
    s.los.push_back(std::any_of(paths.begin(), paths.end(), [](const auto& p) { return p.interactions.empty(); }));
    s.paths.push_back(std::move(paths));
  }
  return s;
}

RunResult run_scenario(const Scenario& scenario, std::uint64_t seed) {
  const auto& cfg = scenario.config;
  const BacktraceOptions backtrace{cfg.backtrace_depth, cfg.max_range, cfg.tracer.limits.frequency_hz};

  RunResult result;
  result.seed = seed;
  EkfState state;

  for (std::size_t k = 0; k < cfg.waypoints.size(); ++k) {
    const auto& paths = scenario.paths[k];
    const double floor_db = detection_floor_db(paths, cfg.tracer.dynamic_range_db, cfg.tracer.sensitivity_db);
    const NoiseSpec noise{cfg.noise.sigma_tof, cfg.noise.sigma_aoa, derive_seed(seed, k)};
    const auto mpcs = synthesize_measurements(paths, noise, cfg.tracer.max_mpcs, floor_db);

    std::vector<std::vector<CandidateLocation>> candidates;
    candidates.reserve(mpcs.size());
    for (const auto& m : mpcs) {
      candidates.push_back(backtrace_candidates(scenario.map, cfg.bs, m, backtrace));
    }
    const auto fix = estimate_position(candidates, cfg.cluster_radius);

    StepRecord rec;
    rec.step = k;
    rec.truth = cfg.waypoints[k];
    rec.mpc_count = mpcs.size();
    rec.los = scenario.los[k];
    if (fix) {
      rec.mapat_fix = fix->position;
    }

    if (k == 0) {
      Point2 start;
      if (fix) {
        start = fix->position;
        rec.mode = StepMode::MapAtFix;
      } else if (!mpcs.empty()) {
        // Single MPC at the start: take its unobstructed branch.
        const auto& first = candidates.front();
        const auto los = std::find_if(first.begin(), first.end(), [](const auto& c) { return c.interactions.empty(); });
        start = los != first.end() ? los->position : first.front().position;
        rec.mode = StepMode::SingleMpcUpdate;
      } else {
        throw DomainError("no MPC detected at the first waypoint; cannot initialise the filter");
      }
      const Vector2 v = leg_velocity(cfg, 0);
      state.x << start.x(), v.x(), start.y(), v.y();
      state.P = cfg.p1_scale * StateCovariance::Identity();
    } else {
      const EkfState predicted = predict(state, scenario.motion, k);
      std::vector<ResolvedMpc> resolved;
      if (fix) {
        rec.mode = StepMode::MapAtFix;
        for (const auto& c : fix->per_mpc_paths) {
          resolved.push_back({&find_mpc(mpcs, c.source_mpc), &c});
        }
      } else if (!mpcs.empty()) {
        rec.mode = StepMode::SingleMpcUpdate;
        for (std::size_t i = 0; i < mpcs.size(); ++i) {
          resolved.push_back({&mpcs[i], &nearest_candidate(candidates[i], predicted.position())});
        }
      }

      if (resolved.empty()) {
        rec.mode = StepMode::Outage;
        state = step_outage(predicted);
      } else {
        std::vector<VirtualAnchor> anchors;
        std::vector<MeasurementVector> z;
        std::vector<double> bearings;
        for (const auto& r : resolved) {
          anchors.push_back(compute_virtual_anchor(cfg.bs, r.path->interactions, scenario.map, r.mpc->id));
          z.push_back(observe(*r.mpc, r.path->interactions, scenario.map));
          bearings.push_back(bearing_from_anchor(r.mpc->aoa, r.path->interactions, scenario.map));
        }
        const auto R = measurement_noise(bearings, cfg.noise.sigma_tof, cfg.noise.sigma_aoa);
        try {
          auto upd = update(predicted, anchors, z, R);
          state = std::move(upd.state);
          rec.nis = upd.nis;
          rec.anchors_used = anchors.size();
        } catch (const SingularityError&) {
          rec.mode = StepMode::Outage;
          state = step_outage(predicted);
        }
      }
    }

    rec.state = state;
    rec.estimate = state.position();
    rec.error = (rec.estimate - rec.truth).norm();
    result.steps.push_back(std::move(rec));
  }
  result.summary = summarize(result.steps);
  return result;
}

MonteCarloResult run_monte_carlo(const Scenario& scenario, std::size_t runs) {
  MonteCarloResult mc;
  std::vector<StepRecord> all;
  for (std::size_t i = 0; i < runs; ++i) {
    mc.runs.push_back(run_scenario(scenario, scenario.config.noise.seed + i));
    all.insert(all.end(), mc.runs.back().steps.begin(), mc.runs.back().steps.end());
  }
  mc.aggregate = summarize(all);
  return mc;
}

BaselineComparison mapat_only_baseline(std::span<const RunResult> runs) {
  BaselineComparison out;
  std::vector<double> mapat;
  std::vector<double> ekf;
  for (const auto& run : runs) {
    for (const auto& s : run.steps) {
      if (!s.mapat_fix || s.mpc_count < 2) {
        continue;
      }
      const double e = (*s.mapat_fix - s.truth).norm();
      out.pairs.push_back({run.seed, s.step, e, s.error});
      mapat.push_back(e);
      ekf.push_back(s.error);
    }
  }
  out.mapat_only_mean = mean_of(mapat);
  out.ekf_mean = mean_of(ekf);
  return out;
}

BaselineComparison mapat_only_baseline(const Scenario& scenario, std::size_t runs) {
  const auto mc = run_monte_carlo(scenario, runs);
  return mapat_only_baseline(mc.runs);
}

std::vector<CdfPoint> compute_cdf(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  std::vector<CdfPoint> cdf;
  cdf.reserve(errors.size());
  const auto n = static_cast<double>(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    cdf.emplace_back(errors[i], static_cast<double>(i + 1) / n);
  }
  return cdf;
}

RunSummary summarize(std::span<const StepRecord> steps) {
  RunSummary s;
  s.steps = steps.size();
  std::vector<double> all;
  std::vector<double> los;
  std::vector<double> nlos;
  std::vector<double> mapat;
  std::vector<double> ekf;
  for (const auto& r : steps) {
    all.push_back(r.error);
    (r.los ? los : nlos).push_back(r.error);
    if (r.mapat_fix && r.mpc_count >= 2) {
      mapat.push_back((*r.mapat_fix - r.truth).norm());
      ekf.push_back(r.error);
    }
  }
  s.mean_error = mean_of(all);
  s.los_mean_error = mean_of(los);
  s.nlos_mean_error = mean_of(nlos);
  s.multi_mpc_steps = mapat.size();
  s.mapat_only_mean = mean_of(mapat);
  s.ekf_mean = mean_of(ekf);
  s.cdf = compute_cdf(all);
  if (!s.cdf.empty()) {
    const std::size_t n = s.cdf.size();
    s.median_error = n % 2 ? s.cdf[n / 2].first : 0.5 * (s.cdf[n / 2 - 1].first + s.cdf[n / 2].first);
    s.max_error = s.cdf.back().first;
  }
  return s;
}

}  // namespace maploc
