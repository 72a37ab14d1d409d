#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <map>
#include <string>
#include <vector>

#include "racer/errors.hpp"
#include "racer/image.hpp"

namespace racer {

enum class Metric { euclidean, composed };

inline const char* to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "composed"; }

/// ceil(sqrt(dr^2 + dc^2)) computed exactly on integers.
constexpr int ceil_sqrt(long long squared) noexcept {
  if (squared <= 0) return 0;
  long long r = static_cast<long long>(std::sqrt(static_cast<double>(squared)));
  while (r * r < squared) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= squared) --r;
  return static_cast<int>(r);
}

inline long long squared_distance(const PixelCoord& a, const PixelCoord& b) noexcept {
  const long long dr = a.row - b.row;
  const long long dc = a.col - b.col;
  return dr * dr + dc * dc;
}

/// The composed metric: Euclidean distance rounded up to an integer.
inline int composed_distance(const PixelCoord& a, const PixelCoord& b) noexcept {
  return ceil_sqrt(squared_distance(a, b));
}

inline double distance(const PixelCoord& a, const PixelCoord& b, Metric metric) noexcept {
  if (metric == Metric::composed) return composed_distance(a, b);
  return std::sqrt(static_cast<double>(squared_distance(a, b)));
}

struct Ring {
  PixelCoord center;
  int index = 0;
  std::vector<PixelCoord> members;  // row-major order
};

/// Pixels s inside `extent` with m-1 < |center - s| <= m; ring 0 is the center itself.
inline Ring ring(const PixelCoord& center, int m, const Extent& extent) {
  if (m < 0) throw DomainError("ring index must be non-negative");
  if (!extent.contains(center)) {
    throw DomainError("ring center " + to_string(center) + " outside image extent");
  }
  Ring out{center, m, {}};
  if (m == 0) {
    out.members.push_back(center);
    return out;
  }
  for (int r = std::max(0, center.row - m); r <= std::min(extent.height - 1, center.row + m); ++r) {
    for (int c = std::max(0, center.col - m); c <= std::min(extent.width - 1, center.col + m); ++c) {
      const PixelCoord s{r, c};
      if (composed_distance(center, s) == m) out.members.push_back(s);
    }
  }
  return out;
}

/// B_R(center): union of rings 0..R clipped to the extent, row-major.
inline std::vector<PixelCoord> disk(const PixelCoord& center, int radius, const Extent& extent) {
  if (radius < 0) throw DomainError("disk radius must be non-negative");
  if (!extent.contains(center)) {
    throw DomainError("disk center " + to_string(center) + " outside image extent");
  }
  std::vector<PixelCoord> out;
  const long long r2 = static_cast<long long>(radius) * radius;
  for (int r = std::max(0, center.row - radius);
       r <= std::min(extent.height - 1, center.row + radius); ++r) {
    for (int c = std::max(0, center.col - radius);
         c <= std::min(extent.width - 1, center.col + radius); ++c) {
      if (squared_distance(center, {r, c}) <= r2) out.push_back({r, c});
    }
  }
  return out;
}

/// Candidate centers p whose disk B_R(p) lies fully inside the image.
struct SearchGrid {
  PixelRect bounds;
  int radius = 0;

  std::size_t size() const noexcept { return bounds.size(); }
  bool contains(const PixelCoord& p) const noexcept { return bounds.contains(p); }
  std::vector<PixelCoord> members() const {
    std::vector<PixelCoord> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(bounds.at(i));
    return out;
  }
};

inline SearchGrid search_grid(const Extent& extent, int radius) {
  if (radius < 0) throw ConfigError("radius must be non-negative");
  if (2 * radius + 1 > std::min(extent.height, extent.width)) {
    throw ConfigError("radius " + std::to_string(radius) + " leaves no valid center in a " +
                      std::to_string(extent.height) + "x" + std::to_string(extent.width) +
                      " image; need 2R+1 <= " +
                      std::to_string(std::min(extent.height, extent.width)) +
                      " (use a smaller --radius or a larger window)");
  }
  return {{radius, extent.height - 1 - radius, radius, extent.width - 1 - radius}, radius};
}

/// One disk offset relative to its center.
struct RingOffset {
  int drow = 0;
  int dcol = 0;
  int ring = 0;         // composed distance
  double euclid = 0.0;  // exact Euclidean distance
};

/// Offsets of B_R(0) grouped by ring; translated per center.
class RingTable {
 public:
  explicit RingTable(int radius) : radius_(radius), ring_begin_(radius + 2, 0) {
    if (radius < 0) throw DomainError("ring table radius must be non-negative");
    std::vector<std::vector<RingOffset>> by_ring(radius + 1);
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        const long long sq = static_cast<long long>(dr) * dr + static_cast<long long>(dc) * dc;
        const int m = ceil_sqrt(sq);
        if (m > radius) continue;
        by_ring[m].push_back({dr, dc, m, std::sqrt(static_cast<double>(sq))});
      }
    }
    for (int m = 0; m <= radius; ++m) {
      ring_begin_[m] = offsets_.size();
      offsets_.insert(offsets_.end(), by_ring[m].begin(), by_ring[m].end());
    }
    ring_begin_[radius + 1] = offsets_.size();
  }

  int radius() const noexcept { return radius_; }
  const std::vector<RingOffset>& offsets() const noexcept { return offsets_; }
  std::span<const RingOffset> ring(int m) const noexcept {
    return std::span<const RingOffset>(offsets_).subspan(ring_begin_[m],
                                                         ring_begin_[m + 1] - ring_begin_[m]);
  }
  std::size_t ring_size(int m) const noexcept { return ring_begin_[m + 1] - ring_begin_[m]; }
  std::size_t disk_size() const noexcept { return offsets_.size(); }

  /// Shared immutable table for `radius`.
  static std::shared_ptr<const RingTable> get(int radius) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const RingTable>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[radius];
    if (!slot) slot = std::make_shared<const RingTable>(radius);
    return slot;
  }

 private:
  int radius_;
  std::vector<RingOffset> offsets_;
  std::vector<std::size_t> ring_begin_;
};

}  // namespace racer
