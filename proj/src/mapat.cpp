#include "maploc/mapat.hpp"

#include "maploc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace maploc {
namespace {

struct Branch {
  Point2 origin;
  Vector2 direction;
  double remaining;
  int depth;
  std::vector<Interaction> interactions;
};

void trace_branch(const MapModel& map, Branch branch, int source_mpc, std::vector<CandidateLocation>& out) {
  if (branch.depth > 0) {
    const auto hit = ray_first_hit(branch.origin, branch.direction, map, branch.remaining + kSelfHitEpsilon);
    if (hit) {
      if (std::abs(hit->distance - branch.remaining) <= kSelfHitEpsilon) {
        out.push_back(CandidateLocation{branch.origin + branch.remaining * branch.direction,
                                        std::move(branch.interactions), source_mpc, true, std::nullopt});
        return;
      }
      const double remaining = branch.remaining - hit->distance;
      const Wall& wall = map.wall(hit->wall);

      Branch reflected{hit->point, reflect_direction(branch.direction, wall), remaining, branch.depth - 1,
                       branch.interactions};
      reflected.interactions.push_back(Interaction{InteractionKind::Reflection, hit->wall, hit->point});

      Branch penetrated{hit->point, branch.direction, remaining, branch.depth - 1, std::move(branch.interactions)};
      penetrated.interactions.push_back(Interaction{InteractionKind::Transmission, hit->wall, hit->point});

      trace_branch(map, std::move(reflected), source_mpc, out);
      trace_branch(map, std::move(penetrated), source_mpc, out);
      return;
    }
  }
  out.push_back(CandidateLocation{branch.origin + branch.remaining * branch.direction,
                                  std::move(branch.interactions), source_mpc, false, std::nullopt});
}

struct Cluster {
  std::vector<const CandidateLocation*> members;
  Point2 centroid;
  double residual = 0.0;
  std::size_t interaction_count = 0;
  double power_mismatch = 0.0;
  std::vector<int> mpc_ids;
};

// Strict "better than" under support -> residual -> power mismatch ->
// interactions -> MPC ids.
bool better(const Cluster& l, const Cluster& r) {
  if (l.members.size() != r.members.size()) {
    return l.members.size() > r.members.size();
  }
  if (std::abs(l.residual - r.residual) > kResidualTieTolerance) {
    return l.residual < r.residual;
  }
  if (std::abs(l.power_mismatch - r.power_mismatch) > kPowerTieToleranceDb) {
    return l.power_mismatch < r.power_mismatch;
  }
  if (l.interaction_count != r.interaction_count) {
    return l.interaction_count < r.interaction_count;
  }
  return l.mpc_ids < r.mpc_ids;
}

}  // namespace

std::vector<CandidateLocation> backtrace_candidates(const MapModel& map, const Point2& bs,
                                                    const MpcMeasurement& mpc,
                                                    const BacktraceOptions& options) {
  require_finite(bs, "BS position");
  if (!std::isfinite(mpc.aoa) || !std::isfinite(mpc.tof) || mpc.tof <= 0.0) {
    throw DomainError("MPC needs a finite AoA and a positive ToF");
  }
  if (options.depth_budget < 0 || options.depth_budget > kMaxInteractionDepth) {
    throw DomainError("back-trace depth budget must be within [0, 6]");
  }
  const double range = kSpeedOfLight * mpc.tof;
  if (range >= options.max_range_m) {
    throw DomainError("MPC range exceeds the configured maximum");
  }

  std::vector<CandidateLocation> out;
  trace_branch(map, Branch{bs, unit_from_bearing(mpc.aoa), range, options.depth_budget, {}}, mpc.id, out);
  if (options.frequency_hz && mpc.power_db) {
    const double fspl = free_space_path_loss_db(range, *options.frequency_hz);
    for (auto& c : out) {
      double loss = 0.0;
      for (const auto& i : c.interactions) {
        const auto& m = map.material_of(i.wall);
        loss += i.kind == InteractionKind::Reflection ? m.reflection_loss_db : m.penetration_loss_db;
      }
      c.power_mismatch_db = std::abs(*mpc.power_db + fspl + loss);
    }
  }
  return out;
}

double replay_length(const Point2& bs, const CandidateLocation& candidate) {
  double length = 0.0;
  Point2 prev = bs;
  for (const auto& i : candidate.interactions) {
    length += (i.point - prev).norm();
    prev = i.point;
  }
  return length + (candidate.position - prev).norm();
}

std::optional<PositionFix> estimate_position(std::span<const std::vector<CandidateLocation>> candidate_sets,
                                             double cluster_radius) {
  if (!(cluster_radius > 0.0) || !std::isfinite(cluster_radius)) {
    throw DomainError("cluster radius must be positive");
  }
  std::vector<std::span<const CandidateLocation>> sets;
  for (const auto& s : candidate_sets) {
    if (!s.empty()) {
      sets.emplace_back(s);
    }
  }
  if (sets.size() < 2) {
    return std::nullopt;
  }

  std::optional<Cluster> best;
  for (const auto& seed_set : sets) {
    for (const auto& seed : seed_set) {
      Cluster c;
      for (const auto& s : sets) {
        const CandidateLocation* nearest = nullptr;
        double nearest_d = std::numeric_limits<double>::infinity();
        for (const auto& cand : s) {
          const double d = (cand.position - seed.position).norm();
          if (d <= cluster_radius && d < nearest_d) {
            nearest = &cand;
            nearest_d = d;
          }
        }
        if (nearest) {
          c.members.push_back(nearest);
        }
      }
      if (c.members.size() < 2) {
        continue;
      }
      c.centroid = Point2::Zero();
      for (const auto* m : c.members) {
        c.centroid += m->position;
        c.interaction_count += m->interactions.size();
        c.power_mismatch += m->power_mismatch_db.value_or(0.0);
        c.mpc_ids.push_back(m->source_mpc);
      }
      c.centroid /= static_cast<double>(c.members.size());
      double ss = 0.0;
      for (const auto* m : c.members) {
        ss += (m->position - c.centroid).squaredNorm();
      }
      c.residual = std::sqrt(ss / static_cast<double>(c.members.size()));
      std::sort(c.mpc_ids.begin(), c.mpc_ids.end());
      if (!best || better(c, *best)) {
        best = std::move(c);
      }
    }
  }
  if (!best) {
    return std::nullopt;
  }

  PositionFix fix;
  fix.position = best->centroid;
  fix.support = static_cast<int>(best->members.size());
  fix.residual = best->residual;
  for (const auto* m : best->members) {
    fix.per_mpc_paths.push_back(*m);
  }
  return fix;
}

}  // namespace maploc
