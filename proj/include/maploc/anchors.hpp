#pragma once

#include "maploc/geomap.hpp"
#include "maploc/measurement.hpp"
#include "maploc/raytrace.hpp"

#include <Eigen/Core>

#include <span>

namespace maploc {

// The BS mirrored across every reflecting wall of one MPC path. It sees the
// UE in line of sight at the full path length.
struct VirtualAnchor {
  Point2 position;
  int source_mpc = 0;
};

// z = [r, n_hat]: range to the anchor and cosine of the arrival bearing from it.
struct MeasurementVector {
  double range = 0.0;
  double n_hat = 0.0;
};

using MeasurementJacobian = Eigen::Matrix<double, 2, 4>;

// Below this distance the measurement model is singular.
inline constexpr double kMinAnchorDistance = 1e-9;

VirtualAnchor compute_virtual_anchor(const Point2& bs, std::span<const Interaction> path, const MapModel& map,
                                     int source_mpc = 0);

MeasurementVector predict_measurement(const VirtualAnchor& va, const Point2& position);

// d[r, n_hat] / d[x, vx, y, vy] at the predicted state.
MeasurementJacobian measurement_jacobian(const VirtualAnchor& va, const Eigen::Vector4d& predicted_state);

// Bearing of the last path segment, i.e. the direction from the virtual
// anchor towards the UE: the BS departure bearing reflected across each
// reflecting wall in order.
double bearing_from_anchor(double aoa_at_bs, std::span<const Interaction> path, const MapModel& map);

// Turns a measured MPC and its resolved path into z = [c*ToF, cos(bearing from VA)].
MeasurementVector observe(const MpcMeasurement& mpc, std::span<const Interaction> path, const MapModel& map);

}  // namespace maploc
