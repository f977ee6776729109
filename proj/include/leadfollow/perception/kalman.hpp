#pragma once

#include <Eigen/Core>

#include <optional>

#include "leadfollow/geometry.hpp"

namespace leadfollow::perception {

/// Constant-velocity leader track; state is (x, y, vx, vy).
struct LeaderTrack {
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  double nis = 0.0;
  bool initialized = false;
  std::optional<Pose> last_seen_pose;
  double last_seen_time = 0.0;

  Vec2 position() const { return state.head<2>(); }
  Vec2 velocity() const { return state.tail<2>(); }
};

struct KalmanNoise {
  double accel_psd = 1.0;  // white-acceleration spectral density q
  Eigen::Matrix2d measurement_cov = 0.01 * Eigen::Matrix2d::Identity();  // R
  double initial_velocity_var = 1.0;
};

/// Discrete white-noise-acceleration process covariance for one step.
Eigen::Matrix4d process_covariance(double dt, double accel_psd);

/// Constant-velocity predict and, if a measurement is given, update with the
/// normalized innovation squared stored in nis. Without a measurement the
/// covariance grows and last-seen fields stay put. The first measurement of an
/// uninitialized track initializes it (nis = 0). Throws NumericalFailure if
/// the innovation covariance is not invertible.
LeaderTrack kf_predict_update(LeaderTrack track,
                              const std::optional<Vec2>& measurement,
                              double dt, const KalmanNoise& noise);

/// nu' S^-1 nu; throws NumericalFailure if S is singular.
double normalized_innovation_squared(const Eigen::Vector2d& innovation,
                                     const Eigen::Matrix2d& s);

/// Below this leader speed the previous heading is kept.
inline constexpr double kHeadingHoldSpeed = 0.05;

LeaderTrack record_last_seen(LeaderTrack track, const Vec2& position,
                             const Vec2& velocity, double time);

}  // namespace leadfollow::perception
