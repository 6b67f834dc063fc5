#include "maploc/anchors.hpp"

#include "maploc/errors.hpp"

#include <cmath>

namespace maploc {

VirtualAnchor compute_virtual_anchor(const Point2& bs, std::span<const Interaction> path, const MapModel& map,
                                     int source_mpc) {
  Point2 anchor = bs;
  for (const auto& i : path) {
    if (i.kind == InteractionKind::Reflection) {
      anchor = mirror_point(anchor, map.wall(i.wall));
    }
  }
  return VirtualAnchor{anchor, source_mpc};
}

MeasurementVector predict_measurement(const VirtualAnchor& va, const Point2& position) {
  require_finite(position, "state position");
  const Vector2 offset = position - va.position;
  const double r = offset.norm();
  if (r < kMinAnchorDistance) {
    throw SingularityError("state position coincides with the virtual anchor");
  }
  return MeasurementVector{r, offset.x() / r};
}

MeasurementJacobian measurement_jacobian(const VirtualAnchor& va, const Eigen::Vector4d& predicted_state) {
  const double dx = predicted_state(0) - va.position.x();
  const double dy = predicted_state(2) - va.position.y();
  const double r = std::hypot(dx, dy);
  if (!std::isfinite(r)) {
    throw DomainError("predicted state is not finite");
  }
  if (r < kMinAnchorDistance) {
    throw SingularityError("predicted position coincides with the virtual anchor");
  }
  const double r3 = r * r * r;
  MeasurementJacobian h = MeasurementJacobian::Zero();
  h(0, 0) = dx / r;
  h(0, 2) = dy / r;
  h(1, 0) = dy * dy / r3;
  h(1, 2) = -dy * dx / r3;
  return h;
}

double bearing_from_anchor(double aoa_at_bs, std::span<const Interaction> path, const MapModel& map) {
  Vector2 d = unit_from_bearing(aoa_at_bs);
  for (const auto& i : path) {
    if (i.kind == InteractionKind::Reflection) {
      d = reflect_direction(d, map.wall(i.wall));
    }
  }
  return bearing_of(d);
}

MeasurementVector observe(const MpcMeasurement& mpc, std::span<const Interaction> path, const MapModel& map) {
  return MeasurementVector{kSpeedOfLight * mpc.tof, std::cos(bearing_from_anchor(mpc.aoa, path, map))};
}

}  // namespace maploc
