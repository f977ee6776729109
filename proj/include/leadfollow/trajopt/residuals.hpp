#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "leadfollow/geometry.hpp"
#include "leadfollow/goal.hpp"
#include "leadfollow/trajectory.hpp"

namespace leadfollow::trajopt {

/// Disc moving at constant velocity; radius already includes the robot
/// footprint.
struct DynamicObstacle {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double radius = 0.5;

  Vec2 at(double t) const { return position + t * velocity; }
};

struct ConstraintSet {
  /// Footprint-inflated hulls; the robot center must stay margin away.
  std::vector<Polygon> static_groups;
  double margin = 0.1;
  std::vector<DynamicObstacle> dynamic_obstacles;
  double v_cap = 1.5;
  double v_max_physical = 1.5;
  double a_max = 2.0;
  /// Speed at p_0, used by the first acceleration residual.
  double initial_speed = 0.0;
  GoalConstraint goal = PointPoseGoal{};

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

struct Weights {
  double obstacle = 50.0;
  double dynamic = 50.0;
  double kinematic = 100.0;
  double accel = 10.0;
  double goal = 20.0;
  double velocity = 100.0;
};

struct OptimizerConfig {
  Weights weights;
  int iterations = 30;
  double tol = 1e-4;
  /// Goal tolerance for line sets and the fallback for hard checks.
  double epsilon = 0.2;
  /// Velocity residuals activate at this fraction of v_cap.
  double velocity_buffer = 0.97;

  void validate() const;
};

enum class Family { Obstacle, Dynamic, Kinematic, Velocity, Accel, Goal };
inline constexpr int kFamilyCount = 6;
const char* to_string(Family f);

/// One weighted scalar residual with its sparse gradient over the packed
/// variable vector (x, y, theta of poses 1..m).
struct Residual {
  double value = 0.0;
  Family family = Family::Obstacle;
  int count = 0;
  std::array<int, 9> index{};
  std::array<double, 9> grad{};

  void add(int i, double g) {
    index[count] = i;
    grad[count] = g;
    ++count;
  }
};

/// Packs poses 1..m into x; p_0 stays outside the variable vector.
Eigen::VectorXd pack(const Trajectory& traj);
/// Writes x back into poses 1..m without normalizing angles.
void unpack(const Eigen::VectorXd& x, Trajectory& traj);

/// Every residual in a fixed order that depends only on m, the constraint
/// set shape and the goal variant. Inactive hinges are emitted with value 0.
std::vector<Residual> evaluate_residuals(const Trajectory& traj,
                                         const ConstraintSet& cs,
                                         const OptimizerConfig& cfg);

/// Dense residual vector and Jacobian (rows follow evaluate_residuals).
Eigen::VectorXd residual_vector(const Trajectory& traj, const ConstraintSet& cs,
                                const OptimizerConfig& cfg);
Eigen::MatrixXd residual_jacobian(const Trajectory& traj, const ConstraintSet& cs,
                                  const OptimizerConfig& cfg);

/// Squared residual sum per family.
std::array<double, kFamilyCount> family_norms(const std::vector<Residual>& rs);

}  // namespace leadfollow::trajopt
