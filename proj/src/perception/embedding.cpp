#include "leadfollow/perception/embedding.hpp"

#include <algorithm>

#include "leadfollow/errors.hpp"

namespace leadfollow::perception {

double AppearanceModel::lighting_at(const Vec2& p) const {
  for (const auto& r : lighting_field) {
    if (p.x() >= r.x_min && p.x() <= r.x_max && p.y() >= r.y_min &&
        p.y() <= r.y_max) {
      return r.factor;
    }
  }
  return 1.0;
}

Eigen::VectorXd AppearanceModel::descriptor_at(double distance) const {
  const double a = scale_drift * (distance - reference_distance);
  if (a == 0.0) return identity_vector;
  return std::cos(a) * identity_vector + std::sin(a) * scale_direction;
}

AppearanceModel make_appearance(std::uint64_t seed, int dimension,
                                double noise_sigma, double scale_drift,
                                double reference_distance,
                                double sensor_range) {
  if (dimension < 2) throw ConfigError("embedding dimension must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd id(dimension), sd(dimension);
  for (int i = 0; i < dimension; ++i) id[i] = n01(rng);
  for (int i = 0; i < dimension; ++i) sd[i] = n01(rng);
  id.normalize();
  sd -= sd.dot(id) * id;
  sd.normalize();

  AppearanceModel m;
  m.identity_vector = id;
  m.scale_direction = sd;
  m.scale_drift = scale_drift;
  m.reference_distance = reference_distance;
  m.noise_sigma = noise_sigma;
  m.sensor_range = sensor_range;
  return m;
}

double range_attenuation(double distance, double sensor_range) {
  return std::clamp(1.0 - distance / (2.0 * sensor_range), 0.5, 1.0);
}

namespace {

Embedding make_embedding(const AppearanceModel& app, double fraction,
                         const Vec2& leader, const Pose& robot,
                         double timestamp, std::mt19937_64& rng) {
  const double d = (leader - robot.position()).norm();
  const double light = app.lighting_at(leader);
  Eigen::VectorXd v = fraction * light * app.descriptor_at(d);
  if (app.noise_sigma > 0.0) {
    std::normal_distribution<double> n01(0.0, app.noise_sigma);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += n01(rng);
  }
  const double norm = v.norm();
  if (norm > 0.0) {
    v /= norm;
  } else {
    v = app.identity_vector;
  }
  Embedding e;
  e.vector = std::move(v);
  e.confidence = std::clamp(
      fraction * light * range_attenuation(d, app.sensor_range), 0.0, 1.0);
  e.distance_at_capture = d;
  e.timestamp = timestamp;
  return e;
}

}  // namespace

Embedding synthesize_embedding(const AppearanceModel& appearance,
                               const sim::LeaderObservation& obs,
                               const Pose& robot, double timestamp,
                               std::mt19937_64& rng) {
  if (!obs.visible || obs.point_set.empty()) {
    throw NotVisible("cannot segment a leader that is not visible");
  }
  return make_embedding(appearance, obs.visible_fraction,
                        sim::mean_point(obs.point_set), robot, timestamp, rng);
}

Embedding prompt_embedding(const AppearanceModel& appearance,
                           const Vec2& leader_position, const Pose& robot,
                           double timestamp, std::mt19937_64& rng) {
  return make_embedding(appearance, 1.0, leader_position, robot, timestamp,
                        rng);
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace leadfollow::perception
