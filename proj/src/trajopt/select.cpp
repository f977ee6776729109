#include "leadfollow/trajopt/select.hpp"

#include <limits>
#include <stdexcept>

namespace leadfollow::trajopt {

double similarity_factor(const HomotopySignature& candidate,
                         const std::optional<HomotopySignature>& prev, double alpha,
                         SimilarityForm form) {
  if (!prev || candidate.values.empty()) return 1.0;
  const std::size_t l = candidate.values.size();
  const std::size_t n = std::min(l, prev->values.size());
  double term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int p = prev->values[i];
    if (p == 0) continue;
    if (form == SimilarityForm::Agreement) {
      term += p != candidate.values[i] ? 1.0 : 0.0;
    } else {
      term += p - candidate.values[i];
    }
  }
  return (1.0 - alpha) + alpha * term / double(l);
}

std::size_t select_index(std::span<const Trajectory> candidates,
                         const std::optional<HomotopySignature>& prev, double alpha,
                         SimilarityForm form) {
  if (candidates.empty()) throw std::invalid_argument("select: no candidates");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("select: alpha outside [0, 1)");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double score =
        similarity_factor(candidates[k].signature, prev, alpha, form) * candidates[k].cost;
    if (score < best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

Trajectory select(std::span<const Trajectory> candidates,
                  const std::optional<HomotopySignature>& prev, double alpha,
                  SimilarityForm form) {
  return candidates[select_index(candidates, prev, alpha, form)];
}

HomotopySignature align_signature(const HomotopySignature& prev,
                                  std::span<const Vec2> prev_centroids,
                                  std::span<const topo::ObstacleGroup> current,
                                  double tolerance) {
  HomotopySignature out;
  out.values.assign(current.size(), 0);
  const std::size_t n = std::min(prev.values.size(), prev_centroids.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    double best = tolerance;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (current[i].centroid - prev_centroids[j]).norm();
      if (d <= best) {
        best = d;
        out.values[i] = prev.values[j];
      }
    }
  }
  return out;
}

}  // namespace leadfollow::trajopt
