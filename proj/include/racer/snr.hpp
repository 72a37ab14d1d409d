#pragma once

#include <limits>

#include "racer/image.hpp"

namespace racer {

/// Returned by snr() when the noise is identically zero.
inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

/// ||clean||^2 / ||noisy - clean||^2.
inline double snr(const ImageGrid& clean, const ImageGrid& noisy) {
  if (clean.extent() != noisy.extent()) throw DomainError("snr: image extents differ");
  double signal = 0.0;
  double noise = 0.0;
  const auto c = clean.values();
  const auto n = noisy.values();
  for (std::size_t i = 0; i < c.size(); ++i) {
    signal += c[i] * c[i];
    const double e = n[i] - c[i];
    noise += e * e;
  }
  if (noise == 0.0) return kInfiniteSnr;
  return signal / noise;
}

}  // namespace racer
