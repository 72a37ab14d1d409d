#pragma once

#include <numeric>
#include <vector>

#include "racer/geometry.hpp"
#include "racer/image.hpp"

namespace racer {

/// Ring sums z and their cumulative sums u around one center, both of length R+1.
struct RadialProfile {
  PixelCoord center;
  std::vector<double> z;
  std::vector<double> u;

  int radius() const noexcept { return static_cast<int>(z.size()) - 1; }
  /// Total mass inside B_R(center).
  double total() const noexcept { return u.empty() ? 0.0 : u.back(); }
  double sum_u() const { return std::accumulate(u.begin(), u.end(), 0.0); }
};

inline std::vector<double> cumulative(const std::vector<double>& z) {
  std::vector<double> u(z.size());
  std::partial_sum(z.begin(), z.end(), u.begin());
  return u;
}

inline void require_in_search_grid(const Extent& extent, const PixelCoord& p, int radius) {
  const SearchGrid grid = search_grid(extent, radius);
  if (!grid.contains(p)) {
    throw DomainError("center " + to_string(p) + " is not in the search grid for R=" +
                      std::to_string(radius) + " (disk would leave the image)");
  }
}

/// z[m] = sum over A_m(p) and u[m] = sum over B_m(p), using a shared offset table.
/// No bounds checks: p must be in the search grid for table.radius().
inline RadialProfile ring_sums_unchecked(const ImageGrid& image, const PixelCoord& p,
                                         const RingTable& table) {
  const int radius = table.radius();
  RadialProfile out{p, std::vector<double>(radius + 1, 0.0), {}};
  for (int m = 0; m <= radius; ++m) {
    double acc = 0.0;
    for (const RingOffset& o : table.ring(m)) acc += image(p.row + o.drow, p.col + o.dcol);
    out.z[m] = acc;
  }
  out.u = cumulative(out.z);
  return out;
}

inline RadialProfile ring_sums(const ImageGrid& image, const PixelCoord& p, int radius) {
  require_in_search_grid(image.extent(), p, radius);
  return ring_sums_unchecked(image, p, *RingTable::get(radius));
}

}  // namespace racer
