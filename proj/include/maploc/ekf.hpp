#pragma once

#include "maploc/anchors.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <span>

namespace maploc {

using StateVector = Eigen::Vector4d;      // [x, vx, y, vy]
using StateCovariance = Eigen::Matrix4d;

struct EkfState {
  StateVector x = StateVector::Zero();
  StateCovariance P = StateCovariance::Identity();

  Point2 position() const { return {x(0), x(2)}; }
  Vector2 velocity() const { return {x(1), x(3)}; }
};

// Replaces the transition at one step: x_pred = F x + u.
struct ControlInput {
  Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
  StateVector u = StateVector::Zero();
};

struct MotionModel {
  double T = 2.0;        // sampling period, s
  double sigma_a = 0.05; // random acceleration std, m/s^2
  std::map<std::size_t, ControlInput> control_schedule;
};

Eigen::Matrix4d build_F(double T);
Eigen::Matrix4d build_Q(double T, double sigma_a);

// Propagates into `step`, applying the scheduled control input if one exists.
EkfState predict(const EkfState& state, const MotionModel& model, std::size_t step);

struct UpdateResult {
  EkfState state;
  Eigen::VectorXd innovation;
  Eigen::MatrixXd innovation_covariance;
  Eigen::MatrixXd gain;
  double nis = 0.0;  // normalised innovation squared
};

inline constexpr double kMaxInnovationCondition = 1e12;

/// Stacked update against one [r, n_hat] pair per virtual anchor.
///
/// Uses the Joseph form for the covariance so P stays symmetric PSD.
/// Throws SingularityError when the innovation covariance is not positive
/// definite or its condition number exceeds kMaxInnovationCondition.
UpdateResult update(const EkfState& predicted, std::span<const VirtualAnchor> anchors,
                    std::span<const MeasurementVector> z, const Eigen::MatrixXd& R);

// Coasting step: the prediction is the estimate.
EkfState step_outage(const EkfState& predicted);

// Variance of cos(bearing + e) for e ~ N(0, sigma^2).
double n_hat_variance(double bearing, double sigma_aoa);

// Diagonal R with [(c*sigma_tof)^2, var(n_hat)] per anchor, in stacking order.
Eigen::MatrixXd measurement_noise(std::span<const double> bearings_from_anchor, double sigma_tof,
                                  double sigma_aoa);

bool is_symmetric_psd(const Eigen::MatrixXd& P, double tol = 1e-9);

}  // namespace maploc
