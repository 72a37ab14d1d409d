#pragma once

#include <cmath>
#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "racer/errors.hpp"
#include "racer/geometry.hpp"
#include "racer/image.hpp"
#include "racer/radial_profile.hpp"
#include "racer/snr.hpp"

namespace racer {

enum class Backend { exact_ring, polar_quadrature };

inline const char* to_string(Backend b) {
  return b == Backend::exact_ring ? "exact-ring" : "polar-quadrature";
}

inline Backend parse_backend(const std::string& name) {
  if (name == "exact-ring" || name == "exact") return Backend::exact_ring;
  if (name == "polar-quadrature" || name == "polar") return Backend::polar_quadrature;
  throw ConfigError("unknown backend '" + name + "' (expected exact-ring or polar-quadrature)");
}

/// Sample counts for the polar backend; zero selects the default.
struct PolarSampling {
  int n_radial = 0;   // radial intervals over [0, R]
  int n_angular = 0;  // samples per circle
};

/// Rotational averaging by bilinear resampling onto a polar grid.
///
/// The disk around a center is sampled at n_radial+1 equispaced radii in
/// [0, R] and n_angular equispaced angles. The angular mean gives the
/// rotational average A(rho) at each node; ring sums are recovered by
/// evaluating A (linearly interpolated in rho) at every pixel of the
/// ring, i.e. by weighting the nodes with per-ring area weights.
class PolarAverager {
 public:
  explicit PolarAverager(int radius, PolarSampling sampling = {}) : radius_(radius) {
    if (radius < 1) throw ConfigError("polar backend needs R >= 1");
    n_radial_ = sampling.n_radial > 0 ? sampling.n_radial : std::max(4, 2 * radius);
    n_angular_ = sampling.n_angular > 0
                     ? sampling.n_angular
                     : std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * radius)));
    if (n_radial_ < 4 || n_angular_ < 4) {
      throw ConfigError("polar sample counts must be >= 4");
    }
    build_stencils();
    build_ring_weights();
  }

  int radius() const noexcept { return radius_; }
  int n_radial() const noexcept { return n_radial_; }
  int n_angular() const noexcept { return n_angular_; }
  double node_radius(int k) const noexcept {
    return static_cast<double>(k) * radius_ / n_radial_;
  }

  /// A(rho_k) for k = 0..n_radial. Samples falling outside the image read as zero.
  std::vector<double> angular_average(const ImageGrid& image, const PixelCoord& p) const {
    std::vector<double> avg(n_radial_ + 1, 0.0);
    const Extent ext = image.extent();
    auto read = [&](int r, int c) { return ext.contains({r, c}) ? image(r, c) : 0.0; };
    for (int k = 0; k <= n_radial_; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n_angular_; ++j) {
        const Stencil& s = stencils_[static_cast<std::size_t>(k) * n_angular_ + j];
        const int r = p.row + s.drow;
        const int c = p.col + s.dcol;
        double v = s.w00 * read(r, c);
        if (s.w01 != 0.0) v += s.w01 * read(r, c + 1);
        if (s.w10 != 0.0) v += s.w10 * read(r + 1, c);
        if (s.w11 != 0.0) v += s.w11 * read(r + 1, c + 1);
        acc += v;
      }
      avg[k] = acc / n_angular_;
    }
    return avg;
  }

  RadialProfile profile(const ImageGrid& image, const PixelCoord& p) const {
    const std::vector<double> avg = angular_average(image, p);
    RadialProfile out{p, std::vector<double>(radius_ + 1, 0.0), {}};
    for (int m = 0; m <= radius_; ++m) {
      double acc = 0.0;
      for (const auto& [node, weight] : ring_weights_[m]) acc += weight * avg[node];
      out.z[m] = acc;
    }
    out.u = cumulative(out.z);
    return out;
  }

  /// Shared averager for (radius, sampling).
  static std::shared_ptr<const PolarAverager> get(int radius, PolarSampling sampling = {}) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const PolarAverager>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{radius, sampling.n_radial, sampling.n_angular}];
    if (!slot) slot = std::make_shared<const PolarAverager>(radius, sampling);
    return slot;
  }

 private:
  struct Stencil {
    int drow = 0;
    int dcol = 0;
    double w00 = 0, w01 = 0, w10 = 0, w11 = 0;
  };

  static void split(double x, int& base, double& frac) {
    base = static_cast<int>(std::floor(x));
    frac = x - base;
    if (frac < 1e-12) {
      frac = 0.0;
    } else if (frac > 1.0 - 1e-12) {
      ++base;
      frac = 0.0;
    }
  }

  void build_stencils() {
    stencils_.resize(static_cast<std::size_t>(n_radial_ + 1) * n_angular_);
    for (int k = 0; k <= n_radial_; ++k) {
      const double rho = node_radius(k);
      for (int j = 0; j < n_angular_; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / n_angular_;
        Stencil s;
        double fr = 0.0;
        double fc = 0.0;
        split(rho * std::sin(theta), s.drow, fr);
        split(rho * std::cos(theta), s.dcol, fc);
        s.w00 = (1 - fr) * (1 - fc);
        s.w01 = (1 - fr) * fc;
        s.w10 = fr * (1 - fc);
        s.w11 = fr * fc;
        stencils_[static_cast<std::size_t>(k) * n_angular_ + j] = s;
      }
    }
  }

  void build_ring_weights() {
    const RingTable& table = *RingTable::get(radius_);
    ring_weights_.assign(radius_ + 1, {});
    for (int m = 0; m <= radius_; ++m) {
      std::vector<double> w(n_radial_ + 1, 0.0);
      for (const RingOffset& o : table.ring(m)) {
        const double t = o.euclid * n_radial_ / radius_;
        int k = static_cast<int>(std::floor(t));
        double frac = t - k;
        if (k >= n_radial_) {
          k = n_radial_;
          frac = 0.0;
        }
        w[k] += 1.0 - frac;
        if (frac > 0.0) w[k + 1] += frac;
      }
      for (int k = 0; k <= n_radial_; ++k) {
        if (w[k] != 0.0) ring_weights_[m].emplace_back(k, w[k]);
      }
    }
  }

  int radius_;
  int n_radial_ = 0;
  int n_angular_ = 0;
  std::vector<Stencil> stencils_;
  std::vector<std::vector<std::pair<int, double>>> ring_weights_;
};

/// Which rotational-averaging route produces the radial profile.
struct AveragerBackend {
  Backend kind = Backend::exact_ring;
  PolarSampling polar{};
};

/// Radial profile of `image` around `p` through the chosen backend.
inline RadialProfile radial_profile(const ImageGrid& image, const PixelCoord& p, int radius,
                                    const AveragerBackend& backend = {}) {
  if (backend.kind == Backend::exact_ring) return ring_sums(image, p, radius);
  require_in_search_grid(image.extent(), p, radius);
  return PolarAverager::get(radius, backend.polar)->profile(image, p);
}

/// Exact-ring rotational average broadcast back onto the disk B_R(center);
/// pixels outside the disk are zero.
inline ImageGrid rotational_average_image(const ImageGrid& image, const PixelCoord& center,
                                          int radius) {
  require_in_search_grid(image.extent(), center, radius);
  const RingTable& table = *RingTable::get(radius);
  ImageGrid out(image.height(), image.width(), 0.0);
  for (int m = 0; m <= radius; ++m) {
    const auto members = table.ring(m);
    double acc = 0.0;
    for (const RingOffset& o : members) acc += image(center.row + o.drow, center.col + o.dcol);
    const double mean = acc / static_cast<double>(members.size());
    for (const RingOffset& o : members) out(center.row + o.drow, center.col + o.dcol) = mean;
  }
  return out;
}

struct SnrGain {
  double before = 0.0;
  double after = 0.0;
  double factor() const noexcept { return after / before; }
};

/// SNR of the raw images versus SNR of their rotational averages about `center`.
inline SnrGain snr_gain_of_averaging(const ImageGrid& clean, const ImageGrid& noisy,
                                     const PixelCoord& center, int radius) {
  if (clean.extent() != noisy.extent()) throw DomainError("snr gain: image extents differ");
  return {snr(clean, noisy), snr(rotational_average_image(clean, center, radius),
                                 rotational_average_image(noisy, center, radius))};
}

}  // namespace racer
