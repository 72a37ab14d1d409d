#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <vector>

#include "racer/image.hpp"

namespace racer {

/// Half spectrum of a real image, layout height x (width/2 + 1).
struct Spectrum {
  int height = 0;
  int width = 0;  // width of the real image
  std::vector<std::complex<double>> bins;

  int half_width() const noexcept { return width / 2 + 1; }
  std::complex<double>& operator()(int ky, int kx) noexcept {
    return bins[static_cast<std::size_t>(ky) * half_width() + kx];
  }
  const std::complex<double>& operator()(int ky, int kx) const noexcept {
    return bins[static_cast<std::size_t>(ky) * half_width() + kx];
  }
};

namespace detail {

/// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

}  // namespace detail

inline Spectrum fft_forward(const ImageGrid& image) {
  const int h = image.height();
  const int w = image.width();
  Spectrum out{h, w, {}};
  const std::size_t nc = static_cast<std::size_t>(h) * out.half_width();
  auto in = detail::fftw_buffer<double>(image.size());
  auto spec = detail::fftw_buffer<fftw_complex>(nc);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_2d(h, w, in.get(), spec.get(), FFTW_ESTIMATE);
  }
  std::memcpy(in.get(), image.values().data(), sizeof(double) * image.size());
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  out.bins.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) out.bins[i] = {spec[i][0], spec[i][1]};
  return out;
}

/// Inverse of fft_forward, including the 1/(h w) normalization.
inline ImageGrid fft_inverse(const Spectrum& spectrum) {
  const int h = spectrum.height;
  const int w = spectrum.width;
  const std::size_t nc = spectrum.bins.size();
  auto spec = detail::fftw_buffer<fftw_complex>(nc);
  auto outbuf = detail::fftw_buffer<double>(static_cast<std::size_t>(h) * w);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_2d(h, w, spec.get(), outbuf.get(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < nc; ++i) {
    spec[i][0] = spectrum.bins[i].real();
    spec[i][1] = spectrum.bins[i].imag();
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  ImageGrid out(h, w);
  const double scale = 1.0 / (static_cast<double>(h) * w);
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = outbuf[i] * scale;
  return out;
}

/// Signed frequency index of bin k along an axis of length n.
constexpr int signed_frequency(int k, int n) noexcept { return k <= n / 2 ? k : k - n; }

}  // namespace racer
