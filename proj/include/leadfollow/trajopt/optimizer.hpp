#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leadfollow/topo/costmap.hpp"
#include "leadfollow/trajectory.hpp"
#include "leadfollow/trajopt/residuals.hpp"

namespace leadfollow::trajopt {

/// g(tau): path length over v_cap, in seconds.
double cost(const Trajectory& traj, double v_cap);

/// Full objective J: travel time plus weighted squared residuals.
double objective(const Trajectory& traj, const ConstraintSet& cs,
                 const OptimizerConfig& cfg);

/// Distance from the final pose to the goal set (meters) and the heading
/// error where the goal constrains heading (radians, 0 otherwise).
struct GoalError {
  double position = 0.0;
  double heading = 0.0;
};
GoalError goal_error(const Trajectory& traj, const GoalConstraint& goal);

/// Smallest signed clearance of poses 1..m to the static hulls and to the
/// predicted dynamic obstacles (radius already including the footprint).
double min_clearance(const Trajectory& traj, const ConstraintSet& cs);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double time_cost = 0.0;
  double lambda = 0.0;
  bool accepted = false;
  std::array<double, kFamilyCount> residuals{};
};

struct OptimizerTrace {
  std::vector<IterationRecord> records;
  /// One JSON object per line.
  std::string to_jsonl() const;
};

/// Levenberg-Marquardt on J with p_0 fixed. Steps are accepted only when J
/// decreases. The result carries its cost and, when groups are given, a
/// recomputed signature. Throws Infeasible if a pose ends inside an obstacle
/// or the goal error exceeds 3 epsilon.
Trajectory optimize(const Trajectory& seed, const ConstraintSet& cs,
                    const OptimizerConfig& cfg,
                    std::span<const topo::ObstacleGroup> groups = {},
                    OptimizerTrace* trace = nullptr);

/// As optimize but without the final hard checks.
Trajectory optimize_unchecked(const Trajectory& seed, const ConstraintSet& cs,
                              const OptimizerConfig& cfg,
                              OptimizerTrace* trace = nullptr);

/// Solves (A) x = b in place for a symmetric positive definite A whose
/// nonzeros lie within `band` of the diagonal. Returns false if A is not
/// positive definite.
bool solve_banded_spd(Eigen::MatrixXd& a, Eigen::VectorXd& b, int band);

}  // namespace leadfollow::trajopt
