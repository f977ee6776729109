#include "leadfollow/perception/kalman.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "leadfollow/errors.hpp"

namespace leadfollow::perception {

Eigen::Matrix4d process_covariance(double dt, double q) {
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    Q(axis, axis) = q * dt3 / 3.0;
    Q(axis, axis + 2) = q * dt2 / 2.0;
    Q(axis + 2, axis) = q * dt2 / 2.0;
    Q(axis + 2, axis + 2) = q * dt;
  }
  return Q;
}

double normalized_innovation_squared(const Eigen::Vector2d& nu,
                                     const Eigen::Matrix2d& s) {
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success || !s.allFinite()) {
    throw NumericalFailure("innovation covariance is not positive definite");
  }
  return nu.dot(llt.solve(nu));
}

LeaderTrack kf_predict_update(LeaderTrack track,
                              const std::optional<Vec2>& z, double dt,
                              const KalmanNoise& noise) {
  if (!(dt > 0.0)) throw NumericalFailure("dt must be positive");
  const Eigen::Matrix2d& R = noise.measurement_cov;

  if (!track.initialized) {
    if (!z) return track;
    track.state << z->x(), z->y(), 0.0, 0.0;
    track.covariance.setZero();
    track.covariance.topLeftCorner<2, 2>() = R;
    track.covariance.bottomRightCorner<2, 2>() =
        noise.initial_velocity_var * Eigen::Matrix2d::Identity();
    track.nis = 0.0;
    track.initialized = true;
    return track;
  }

  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;
  track.state = F * track.state;
  track.covariance = F * track.covariance * F.transpose() +
                     process_covariance(dt, noise.accel_psd);

  if (z) {
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    const Eigen::Vector2d nu = *z - H * track.state;
    const Eigen::Matrix2d S = H * track.covariance * H.transpose() + R;
    track.nis = normalized_innovation_squared(nu, S);
    const Eigen::Matrix<double, 4, 2> K =
        track.covariance * H.transpose() * S.inverse();
    track.state += K * nu;
    // Joseph form keeps the covariance symmetric positive definite.
    const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - K * H;
    track.covariance = I_KH * track.covariance * I_KH.transpose() +
                       K * R * K.transpose();
  }
  track.covariance = 0.5 * (track.covariance + track.covariance.transpose());
  return track;
}

LeaderTrack record_last_seen(LeaderTrack track, const Vec2& position,
                             const Vec2& velocity, double time) {
  double heading = track.last_seen_pose ? track.last_seen_pose->theta : 0.0;
  if (velocity.norm() >= kHeadingHoldSpeed) heading = angle_of(velocity);
  track.last_seen_pose = Pose(position, heading);
  track.last_seen_time = time;
  return track;
}

}  // namespace leadfollow::perception
