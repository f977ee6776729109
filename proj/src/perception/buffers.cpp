#include "leadfollow/perception/buffers.hpp"

#include <algorithm>
#include <cmath>

#include "leadfollow/errors.hpp"

namespace leadfollow::perception {

bool ranks_before(const Embedding& a, const Embedding& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.timestamp > b.timestamp;
}

TemporalBuffer::TemporalBuffer(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw ConfigError("temporal buffer capacity must be > 0");
  entries_.reserve(capacity + 1);
}

void TemporalBuffer::insert(const Embedding& e) {
  if (static_cast<int>(entries_.size()) == capacity_ &&
      !ranks_before(e, entries_.back())) {
    return;
  }
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), e,
                              [](const Embedding& x, const Embedding& y) {
                                return ranks_before(x, y);
                              });
  entries_.insert(pos, e);
  if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_back();
}

DistanceFrameBuffer::DistanceFrameBuffer(double bin_width, int bin_count)
    : bin_width_(bin_width) {
  if (!(bin_width > 0.0) || bin_count <= 0) {
    throw ConfigError("distance buffer needs bin_width > 0 and bin_count > 0");
  }
  bins_.resize(bin_count);
}

int DistanceFrameBuffer::bin_index(double distance) const {
  return static_cast<int>(std::floor(distance / bin_width_)) + 1;
}

void DistanceFrameBuffer::insert(const Embedding& e) {
  if (!(e.distance_at_capture >= 0.0)) return;
  const int i = bin_index(e.distance_at_capture);
  if (i < 1 || i > bin_count()) return;
  auto& slot = bins_[i - 1];
  if (!slot || ranks_before(e, *slot)) slot = e;
}

void DistanceFrameBuffer::clear() {
  for (auto& b : bins_) b.reset();
}

std::size_t DistanceFrameBuffer::occupied() const {
  return static_cast<std::size_t>(
      std::count_if(bins_.begin(), bins_.end(),
                    [](const auto& b) { return b.has_value(); }));
}

TemporalBuffer update_temporal_buffer(TemporalBuffer buf, const Embedding& e) {
  buf.insert(e);
  return buf;
}

DistanceFrameBuffer update_distance_buffer(DistanceFrameBuffer buf,
                                           const Embedding& e) {
  buf.insert(e);
  return buf;
}

MatchResult match_leader(const Embedding& query, const TemporalBuffer& tb,
                         const DistanceFrameBuffer& dfb, double threshold) {
  if (tb.empty() && dfb.empty()) {
    throw EmptyBuffers("no stored leader embeddings to match against");
  }
  double best = -1.0;
  for (const auto& e : tb.entries()) {
    best = std::max(best, cosine_similarity(query.vector, e.vector));
  }
  for (int i = 1; i <= dfb.bin_count(); ++i) {
    if (const auto& e = dfb.bin(i)) {
      best = std::max(best, cosine_similarity(query.vector, e->vector));
    }
  }
  return {best >= threshold, best};
}

nlohmann::json dump_buffers(const TemporalBuffer& tb,
                            const DistanceFrameBuffer& dfb) {
  nlohmann::json j;
  j["temporal"] = nlohmann::json::array();
  for (const auto& e : tb.entries()) {
    j["temporal"].push_back({{"confidence", e.confidence},
                             {"distance", e.distance_at_capture},
                             {"timestamp", e.timestamp}});
  }
  j["distance_bins"] = nlohmann::json::array();
  for (int i = 1; i <= dfb.bin_count(); ++i) {
    nlohmann::json bin = {{"bin", i},
                          {"range", {(i - 1) * dfb.bin_width(), i * dfb.bin_width()}}};
    if (const auto& e = dfb.bin(i)) {
      bin["confidence"] = e->confidence;
      bin["distance"] = e->distance_at_capture;
      bin["timestamp"] = e->timestamp;
    } else {
      bin["confidence"] = nullptr;
    }
    j["distance_bins"].push_back(std::move(bin));
  }
  return j;
}

}  // namespace leadfollow::perception
