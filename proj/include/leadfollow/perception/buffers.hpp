#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

#include "leadfollow/perception/embedding.hpp"

namespace leadfollow::perception {

/// True if a ranks ahead of b: higher confidence, then later timestamp.
bool ranks_before(const Embedding& a, const Embedding& b);

/// The n1 highest-confidence embeddings seen so far, best first.
class TemporalBuffer {
 public:
  explicit TemporalBuffer(int capacity = 8);

  void insert(const Embedding& e);
  void clear() { entries_.clear(); }

  int capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Embedding>& entries() const { return entries_; }

 private:
  int capacity_;
  std::vector<Embedding> entries_;
};

/// One maximum-confidence embedding per distance interval
/// [(i-1)*bin_width, i*bin_width), i = 1..bin_count.
class DistanceFrameBuffer {
 public:
  DistanceFrameBuffer(double bin_width = 1.0, int bin_count = 10);

  /// 1-based bin index for a capture distance (may exceed bin_count).
  int bin_index(double distance) const;
  void insert(const Embedding& e);
  void clear();

  double bin_width() const { return bin_width_; }
  int bin_count() const { return static_cast<int>(bins_.size()); }
  /// Occupant of 1-based bin i.
  const std::optional<Embedding>& bin(int i) const { return bins_.at(i - 1); }
  std::size_t occupied() const;
  bool empty() const { return occupied() == 0; }

 private:
  double bin_width_;
  std::vector<std::optional<Embedding>> bins_;
};

TemporalBuffer update_temporal_buffer(TemporalBuffer buf, const Embedding& e);
DistanceFrameBuffer update_distance_buffer(DistanceFrameBuffer buf,
                                           const Embedding& e);

struct MatchResult {
  bool matched = false;
  double score = 0.0;
};

/// Max cosine similarity against the union of both buffers. Throws
/// EmptyBuffers when both are empty.
MatchResult match_leader(const Embedding& query, const TemporalBuffer& tb,
                         const DistanceFrameBuffer& dfb, double threshold);

/// Debug dump: per-entry confidence, capture distance and timestamp.
nlohmann::json dump_buffers(const TemporalBuffer& tb,
                            const DistanceFrameBuffer& dfb);

}  // namespace leadfollow::perception
