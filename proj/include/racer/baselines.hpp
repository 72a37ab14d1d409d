#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <vector>

#include "racer/errors.hpp"
#include "racer/fft.hpp"
#include "racer/image.hpp"
#include "racer/parallel.hpp"

namespace racer {

/// A reference image; `origin` is the template pixel reported as the match position.
struct Template {
  ImageGrid values;
  PixelCoord origin;
};

struct Shift {
  int drow = 0;
  int dcol = 0;
  friend constexpr bool operator==(const Shift&, const Shift&) = default;
};

enum class CorrelationMethod { spatial, fourier };

/// Isotropic Gaussian with standard deviation width/2 and unit peak at the window center.
inline Template gaussian_template(const Extent& extent, double width) {
  if (!(width > 0.0)) throw ConfigError("gaussian template width must be positive");
  const double sigma = width / 2.0;
  const PixelCoord center = extent.origin();
  ImageGrid values(extent.height, extent.width);
  for (int r = 0; r < extent.height; ++r) {
    for (int c = 0; c < extent.width; ++c) {
      const double d2 = static_cast<double>(squared_distance({r, c}, center));
      values(r, c) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
  return {std::move(values), center};
}

/// Separable Gaussian blur with zero padding; kernel truncated at 4 sigma.
inline ImageGrid gaussian_blur(const ImageGrid& image, double sigma) {
  if (!(sigma > 0.0)) return image;
  const int half = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * half + 1);
  double norm = 0.0;
  for (int k = -half; k <= half; ++k) {
    kernel[k + half] = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    norm += kernel[k + half];
  }
  for (double& k : kernel) k /= norm;
  ImageGrid tmp(image.height(), image.width(), 0.0);
  ImageGrid out(image.height(), image.width(), 0.0);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const int cc = c + k;
        if (cc >= 0 && cc < image.width()) acc += kernel[k + half] * image(r, cc);
      }
      tmp(r, c) = acc;
    }
  }
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        const int rr = r + k;
        if (rr >= 0 && rr < image.height()) acc += kernel[k + half] * tmp(rr, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

/// Raw correlation sum_{i,j} T(i,j) I(a + (i,j)) for every top-left placement a
/// that keeps the template inside the test image.
inline ImageGrid correlation_map(const ImageGrid& test, const ImageGrid& tmpl,
                                 CorrelationMethod method = CorrelationMethod::spatial,
                                 int threads = 1) {
  if (tmpl.height() > test.height() || tmpl.width() > test.width()) {
    throw DomainError("template " + std::to_string(tmpl.height()) + "x" +
                      std::to_string(tmpl.width()) + " is larger than test image " +
                      std::to_string(test.height()) + "x" + std::to_string(test.width()));
  }
  const int rows = test.height() - tmpl.height() + 1;
  const int cols = test.width() - tmpl.width() + 1;
  ImageGrid out(rows, cols, 0.0);
  if (method == CorrelationMethod::spatial) {
    parallel_for(static_cast<std::size_t>(rows), threads, [&](std::size_t ar) {
      const int a_row = static_cast<int>(ar);
      for (int a_col = 0; a_col < cols; ++a_col) {
        double acc = 0.0;
        for (int i = 0; i < tmpl.height(); ++i) {
          for (int j = 0; j < tmpl.width(); ++j) acc += tmpl(i, j) * test(a_row + i, a_col + j);
        }
        out(a_row, a_col) = acc;
      }
    });
    return out;
  }
  // Circular correlation on the test grid; placements with a + size <= extent never wrap.
  ImageGrid padded(test.height(), test.width(), 0.0);
  for (int i = 0; i < tmpl.height(); ++i) {
    for (int j = 0; j < tmpl.width(); ++j) padded(i, j) = tmpl(i, j);
  }
  Spectrum ft = fft_forward(test);
  const Spectrum fk = fft_forward(padded);
  for (std::size_t k = 0; k < ft.bins.size(); ++k) ft.bins[k] *= std::conj(fk.bins[k]);
  const ImageGrid full = fft_inverse(ft);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = full(r, c);
  }
  return out;
}

/// Shift of the template origin from the test origin at the correlation peak.
/// `max_shift` < 0 admits every placement inside the image; ties go to the
/// lexicographically smallest (drow, dcol).
inline Shift cross_correlation_shift(const ImageGrid& test, const Template& tmpl, int max_shift = -1,
                                     CorrelationMethod method = CorrelationMethod::spatial,
                                     int threads = 1) {
  const ImageGrid corr = correlation_map(test, tmpl.values, method, threads);
  const PixelCoord center = test.extent().origin();
  bool found = false;
  double best = 0.0;
  Shift best_shift;
  for (int ar = 0; ar < corr.height(); ++ar) {
    for (int ac = 0; ac < corr.width(); ++ac) {
      const Shift s{ar + tmpl.origin.row - center.row, ac + tmpl.origin.col - center.col};
      if (max_shift >= 0 && (std::abs(s.drow) > max_shift || std::abs(s.dcol) > max_shift)) continue;
      if (!found || corr(ar, ac) > best) {
        best = corr(ar, ac);
        best_shift = s;
        found = true;
      }
    }
  }
  if (!found) throw ConfigError("no admissible shift within max_shift");
  return best_shift;
}

/// Location of the template origin in the test image at the correlation peak.
inline PixelCoord cross_correlation_center(const ImageGrid& test, const Template& tmpl,
                                           int max_shift = -1,
                                           CorrelationMethod method = CorrelationMethod::spatial) {
  const Shift s = cross_correlation_shift(test, tmpl, max_shift, method);
  const PixelCoord center = test.extent().origin();
  return {center.row + s.drow, center.col + s.dcol};
}

struct RfaConfig {
  int max_iters = 20;
  double convergence_tol = 0.5;  // mean L1 shift change per image, pixels
  int max_shift = 10;
  int threads = 1;
};

struct RfaResult {
  std::vector<Shift> shifts;  // applied to each image (zero fill) to align it
  int iterations = 0;
};

/// Translation-only reference-free alignment.
///
/// Each image in turn is matched against the sum of all other (currently
/// shifted) images and its shift is replaced by the correlation peak within
/// +-max_shift. Sweeps repeat until the mean per-image change is at most
/// `convergence_tol` or `max_iters` sweeps have run.
inline RfaResult rfa_align(const std::vector<ImageGrid>& images, const RfaConfig& cfg = {}) {
  if (images.size() < 2) throw DomainError("rfa_align needs at least two images");
  if (cfg.max_iters < 1) throw ConfigError("rfa max_iters must be >= 1");
  if (cfg.max_shift < 0) throw ConfigError("rfa max_shift must be >= 0");
  const Extent extent = images.front().extent();
  for (const auto& img : images) {
    if (img.extent() != extent) throw DomainError("rfa_align: images must share one extent");
  }
  const std::size_t n = images.size();
  RfaResult out{std::vector<Shift>(n), 0};
  std::vector<ImageGrid> shifted = images;
  ImageGrid total(extent.height, extent.width, 0.0);
  for (const auto& img : shifted) {
    for (std::size_t k = 0; k < total.size(); ++k) total.values()[k] += img.values()[k];
  }
  const int span = 2 * cfg.max_shift + 1;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    ++out.iterations;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ImageGrid ref = total;
      for (std::size_t k = 0; k < ref.size(); ++k) ref.values()[k] -= shifted[i].values()[k];
      // score(s) = sum_y I_i(y) ref(y + s)
      std::vector<double> score(static_cast<std::size_t>(span) * span, 0.0);
      const ImageGrid& img = images[i];
      parallel_for(score.size(), cfg.threads, [&](std::size_t idx) {
        const int sr = static_cast<int>(idx) / span - cfg.max_shift;
        const int sc = static_cast<int>(idx) % span - cfg.max_shift;
        double acc = 0.0;
        for (int r = std::max(0, -sr); r < std::min(extent.height, extent.height - sr); ++r) {
          for (int c = std::max(0, -sc); c < std::min(extent.width, extent.width - sc); ++c) {
            acc += img(r, c) * ref(r + sr, c + sc);
          }
        }
        score[idx] = acc;
      });
      std::size_t best = 0;
      for (std::size_t k = 1; k < score.size(); ++k) {
        if (score[k] > score[best]) best = k;
      }
      const Shift s{static_cast<int>(best) / span - cfg.max_shift,
                    static_cast<int>(best) % span - cfg.max_shift};
      change += std::abs(s.drow - out.shifts[i].drow) + std::abs(s.dcol - out.shifts[i].dcol);
      if (!(s == out.shifts[i])) {
        for (std::size_t k = 0; k < total.size(); ++k) total.values()[k] -= shifted[i].values()[k];
        shifted[i] = shift_image(img, s.drow, s.dcol);
        for (std::size_t k = 0; k < total.size(); ++k) total.values()[k] += shifted[i].values()[k];
        out.shifts[i] = s;
      }
    }
    if (change / static_cast<double>(n) <= cfg.convergence_tol) break;
  }
  return out;
}

}  // namespace racer
