#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

#include "leadfollow/geometry.hpp"
#include "leadfollow/sim/world.hpp"

namespace leadfollow::perception {

/// Appearance descriptor of the leader with its confidence score.
struct Embedding {
  Eigen::VectorXd vector;  // unit norm
  double confidence = 0.0;
  double distance_at_capture = 0.0;
  double timestamp = 0.0;
};

/// Axis-aligned region with a lighting factor in [0,1].
struct LightingRegion {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double factor = 1.0;
};

/// Statistical stand-in for a segmentation network.
///
/// The noiseless descriptor seen at distance d is the identity vector rotated
/// by scale_drift * (d - reference_distance) toward a fixed per-leader scale
/// direction: the same leader looks different when it fills a different part
/// of the image. Partial views and dim light shrink the signal relative to
/// the per-component Gaussian noise.
struct AppearanceModel {
  Eigen::VectorXd identity_vector;
  Eigen::VectorXd scale_direction;  // unit, orthogonal to identity_vector
  double scale_drift = 0.0;         // rad per meter
  double reference_distance = 0.0;  // m
  std::vector<LightingRegion> lighting_field;
  double noise_sigma = 0.0;
  double sensor_range = 12.0;

  double lighting_at(const Vec2& p) const;
  /// Unit descriptor of a full, well-lit, noise-free view at distance d.
  Eigen::VectorXd descriptor_at(double distance) const;
};

/// Builds identity and scale directions from the seed (unit, orthogonal).
AppearanceModel make_appearance(std::uint64_t appearance_seed, int dimension,
                                double noise_sigma, double scale_drift,
                                double reference_distance,
                                double sensor_range);

/// clamp(1 - d / (2 * range), 0.5, 1)
double range_attenuation(double distance, double sensor_range);

/// Throws NotVisible if obs.visible is false.
Embedding synthesize_embedding(const AppearanceModel& appearance,
                               const sim::LeaderObservation& obs,
                               const Pose& robot, double timestamp,
                               std::mt19937_64& rng);

/// Embedding of a fully visible leader at a given distance and position; used
/// for the initial prompt when a leader is assigned.
Embedding prompt_embedding(const AppearanceModel& appearance,
                           const Vec2& leader_position, const Pose& robot,
                           double timestamp, std::mt19937_64& rng);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace leadfollow::perception
