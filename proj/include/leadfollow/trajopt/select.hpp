#pragma once

#include <optional>
#include <span>
#include <vector>

#include "leadfollow/topo/costmap.hpp"
#include "leadfollow/trajectory.hpp"

namespace leadfollow::trajopt {

enum class SimilarityForm {
  /// f = (1 - alpha) + alpha * (fraction of matched groups whose side differs).
  Agreement,
  /// f = (1 - alpha) + alpha * sum_i (prev_i - val_i) / l over matched groups.
  Literal,
};

/// Hysteresis factor f for one candidate. prev holds +1/-1 for groups matched
/// to the previous tick and 0 for unmatched ones; it must be aligned to the
/// candidate's group indexing.
double similarity_factor(const HomotopySignature& candidate,
                         const std::optional<HomotopySignature>& prev, double alpha,
                         SimilarityForm form = SimilarityForm::Agreement);

/// Index of the candidate minimizing f * cost (first on ties).
std::size_t select_index(std::span<const Trajectory> candidates,
                         const std::optional<HomotopySignature>& prev, double alpha,
                         SimilarityForm form = SimilarityForm::Agreement);

/// Throws std::invalid_argument if candidates is empty or alpha is outside
/// [0, 1).
Trajectory select(std::span<const Trajectory> candidates,
                  const std::optional<HomotopySignature>& prev, double alpha,
                  SimilarityForm form = SimilarityForm::Agreement);

/// Re-indexes a previous signature onto the current groups: each current
/// group takes the value of the previous group whose centroid lies within
/// tolerance (nearest wins), or 0 if none does.
HomotopySignature align_signature(const HomotopySignature& prev,
                                  std::span<const Vec2> prev_centroids,
                                  std::span<const topo::ObstacleGroup> current,
                                  double tolerance);

}  // namespace leadfollow::trajopt
