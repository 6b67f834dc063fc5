#include "maploc/ekf.hpp"

#include "maploc/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace maploc {

Eigen::Matrix4d build_F(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("sampling period must be positive");
  }
  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 1) = T;
  F(2, 3) = T;
  return F;
}

Eigen::Matrix4d build_Q(double T, double sigma_a) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("sampling period must be positive");
  }
  if (!(sigma_a >= 0.0) || !std::isfinite(sigma_a)) {
    throw DomainError("sigma_a must be non-negative");
  }
  Eigen::Matrix2d block;
  block << std::pow(T, 4) / 4.0, std::pow(T, 3) / 2.0,
           std::pow(T, 3) / 2.0, T * T;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  Q.block<2, 2>(0, 0) = block;
  Q.block<2, 2>(2, 2) = block;
  return Q * (sigma_a * sigma_a);
}

EkfState predict(const EkfState& state, const MotionModel& model, std::size_t step) {
  Eigen::Matrix4d F = build_F(model.T);
  StateVector u = StateVector::Zero();
  if (const auto it = model.control_schedule.find(step); it != model.control_schedule.end()) {
    F = it->second.F;
    u = it->second.u;
  }
  EkfState out;
  out.x = F * state.x + u;
  out.P = F * state.P * F.transpose() + build_Q(model.T, model.sigma_a);
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

UpdateResult update(const EkfState& predicted, std::span<const VirtualAnchor> anchors,
                    std::span<const MeasurementVector> z, const Eigen::MatrixXd& R) {
  const auto m = static_cast<Eigen::Index>(anchors.size());
  if (m == 0) {
    throw DomainError("update needs at least one anchor");
  }
  if (z.size() != anchors.size()) {
    throw DomainError("one measurement per anchor is required");
  }
  if (R.rows() != 2 * m || R.cols() != 2 * m) {
    throw DomainError("R must be 2m x 2m for m anchors");
  }

  Eigen::MatrixXd H(2 * m, 4);
  Eigen::VectorXd innovation(2 * m);
  const Point2 p = predicted.position();
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& va = anchors[static_cast<std::size_t>(i)];
    H.block<2, 4>(2 * i, 0) = measurement_jacobian(va, predicted.x);
    const auto zp = predict_measurement(va, p);
    innovation(2 * i) = z[static_cast<std::size_t>(i)].range - zp.range;
    innovation(2 * i + 1) = z[static_cast<std::size_t>(i)].n_hat - zp.n_hat;
  }

  Eigen::MatrixXd S = H * predicted.P * H.transpose() + R;
  S = 0.5 * (S + S.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxInnovationCondition) {
    throw SingularityError("innovation covariance is singular or ill-conditioned");
  }

  const Eigen::LDLT<Eigen::MatrixXd> S_ldlt(S);
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::MatrixXd K = S_ldlt.solve(H * predicted.P).transpose();

  UpdateResult out;
  out.state.x = predicted.x + K * innovation;
  const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - K * H;
  out.state.P = I_KH * predicted.P * I_KH.transpose() + K * R * K.transpose();
  out.state.P = 0.5 * (out.state.P + out.state.P.transpose());
  out.nis = innovation.dot(S_ldlt.solve(innovation));
  out.innovation = std::move(innovation);
  out.innovation_covariance = std::move(S);
  out.gain = K;
  return out;
}

EkfState step_outage(const EkfState& predicted) { return predicted; }

double n_hat_variance(double bearing, double sigma_aoa) {
  const double s2 = sigma_aoa * sigma_aoa;
  const double v = 0.5 * (1.0 + std::cos(2.0 * bearing) * std::exp(-2.0 * s2)) -
                   std::pow(std::cos(bearing), 2) * std::exp(-s2);
  return std::max(v, 0.0);
}

Eigen::MatrixXd measurement_noise(std::span<const double> bearings_from_anchor, double sigma_tof,
                                  double sigma_aoa) {
  const auto m = static_cast<Eigen::Index>(bearings_from_anchor.size());
  Eigen::VectorXd diag(2 * m);
  const double range_sigma = kSpeedOfLight * sigma_tof;
  for (Eigen::Index i = 0; i < m; ++i) {
    diag(2 * i) = range_sigma * range_sigma;
    diag(2 * i + 1) = n_hat_variance(bearings_from_anchor[static_cast<std::size_t>(i)], sigma_aoa);
  }
  return diag.asDiagonal();
}

bool is_symmetric_psd(const Eigen::MatrixXd& P, double tol) {
  if (P.rows() != P.cols() || !P.allFinite()) {
    return false;
  }
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > -tol;
}

}  // namespace maploc
