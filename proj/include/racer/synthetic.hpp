#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "racer/errors.hpp"
#include "racer/estimators.hpp"
#include "racer/fft.hpp"
#include "racer/image.hpp"
#include "racer/parallel.hpp"
#include "racer/snr.hpp"

namespace racer {

// ---------------------------------------------------------------------------
// Seeds

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream (a, b, c) under `master`; independent of evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(splitmix64(master) ^ a) ^ b) ^ c);
}

// ---------------------------------------------------------------------------
// Objects and scenes

enum class ObjectKind { disk, blob, hedgehog, elongated, raster };

inline const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::disk: return "disk";
    case ObjectKind::blob: return "blob";
    case ObjectKind::hedgehog: return "hedgehog";
    case ObjectKind::elongated: return "elongated";
    case ObjectKind::raster: return "raster";
  }
  return "?";
}

inline ObjectKind parse_object_kind(const std::string& name) {
  for (auto k : {ObjectKind::disk, ObjectKind::blob, ObjectKind::hedgehog, ObjectKind::elongated,
                 ObjectKind::raster}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown object kind '" + name + "'");
}

struct ObjectSpec {
  ObjectKind kind = ObjectKind::disk;
  int radius = 10;
  double intensity = 1.0;
  /// Silhouette for ObjectKind::raster, placed with its origin pixel at the object center.
  std::optional<ImageGrid> raster;
};

/// Intensity of a procedural object at offset (dy, dx) from its center, in [0, 1].
inline double object_value(const ObjectSpec& spec, int dy, int dx) {
  const double r = spec.radius;
  const double y = dy;
  const double x = dx;
  const double rho = std::hypot(y, x);
  switch (spec.kind) {
    case ObjectKind::disk:
      return static_cast<long long>(dy) * dy + static_cast<long long>(dx) * dx <=
                     static_cast<long long>(spec.radius) * spec.radius
                 ? 1.0
                 : 0.0;
    case ObjectKind::blob: {
      if (rho >= r) return 0.0;
      const double c = std::cos(std::numbers::pi * rho / (2.0 * r));
      return c * c;
    }
    case ObjectKind::hedgehog: {
      // Body ellipse, snout disk, and a fan of spikes over the back.
      const double by = (y - 0.08 * r) / (0.48 * r);
      const double bx = x / (0.62 * r);
      if (by * by + bx * bx <= 1.0) return 1.0;
      if (std::hypot(y - 0.15 * r, x - 0.62 * r) <= 0.2 * r) return 1.0;
      constexpr int kSpikes = 11;
      const double theta = std::atan2(y, x);  // y grows downward; the back is theta < 0
      for (int k = 0; k < kSpikes; ++k) {
        const double phi = -std::numbers::pi + std::numbers::pi * (k + 0.5) / kSpikes;
        const double tip = r * (0.80 + 0.07 * (k % 3));
        const double base = 0.35 * r;
        if (rho < base || rho > tip) continue;
        double dphi = std::abs(theta - phi);
        dphi = std::min(dphi, 2.0 * std::numbers::pi - dphi);
        const double half = 0.5 * std::numbers::pi / kSpikes * (1.0 - (rho - base) / (tip - base));
        if (dphi <= half) return 1.0;
      }
      return 0.0;
    }
    case ObjectKind::elongated: {
      const double ey = y / (0.25 * r);
      const double ex = x / r;
      if (ey * ey + ex * ex <= 1.0) return 1.0;
      // dorsal fin
      if (y < 0 && y >= -0.55 * r && std::abs(x + 0.1 * r) <= 0.25 * r * (1.0 + y / (0.55 * r))) {
        return 1.0;
      }
      return 0.0;
    }
    case ObjectKind::raster: {
      if (!spec.raster) throw ConfigError("raster object without an image");
      const PixelCoord o = spec.raster->extent().origin();
      const PixelCoord p{o.row + dy, o.col + dx};
      return spec.raster->extent().contains(p) ? (*spec.raster)[p] : 0.0;
    }
  }
  return 0.0;
}

/// Half-extent of the box that bounds an object's support.
inline int object_reach(const ObjectSpec& spec) {
  if (spec.kind == ObjectKind::raster && spec.raster) {
    return std::max(spec.raster->height(), spec.raster->width());
  }
  return spec.radius;
}

/// Adds the object centered at `center`. Returns false if part of the support was clipped.
inline bool draw_object(ImageGrid& image, const ObjectSpec& spec, const PixelCoord& center) {
  const int reach = object_reach(spec);
  bool complete = true;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const double v = object_value(spec, dy, dx) * spec.intensity;
      if (v == 0.0) continue;
      const PixelCoord p{center.row + dy, center.col + dx};
      if (!image.extent().contains(p)) {
        complete = false;
        continue;
      }
      image[p] += v;
    }
  }
  return complete;
}

/// A second, possibly clipped object at `offset` from the main object's center.
struct PartialObject {
  ObjectSpec object;
  PixelCoord offset;
};

struct SceneSpec {
  Extent extent{41, 41};
  ObjectSpec object;
  /// Object center relative to the image origin.
  PixelCoord shift{0, 0};
  std::optional<PartialObject> partial;
};

struct Scene {
  ImageGrid clean;
  ImageGrid object_only;
  PixelCoord object_center;
  /// Grid geometric median (composed metric) of the main object.
  PixelCoord truth;
};

inline Scene render_scene(const SceneSpec& spec, int threads = 1) {
  const PixelCoord origin = spec.extent.origin();
  const PixelCoord center{origin.row + spec.shift.row, origin.col + spec.shift.col};
  if (!spec.extent.contains(center)) throw DomainError("object center " + to_string(center) + " outside image");
  ImageGrid object(spec.extent.height, spec.extent.width, 0.0);
  if (!draw_object(object, spec.object, center)) {
    throw DomainError("object of radius " + std::to_string(spec.object.radius) + " at " +
                      to_string(center) + " does not fit in the image");
  }
  ImageGrid clean = object;
  if (spec.partial) {
    draw_object(clean, spec.partial->object,
                {center.row + spec.partial->offset.row, center.col + spec.partial->offset.col});
  }
  const PixelCoord truth = geometric_median(object, Metric::composed, threads);
  return {std::move(clean), std::move(object), center, truth};
}

// ---------------------------------------------------------------------------
// Noise

enum class NoiseModel { gaussian_iid, uniform_positive, colored };

inline const char* to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::gaussian_iid: return "gaussian-iid";
    case NoiseModel::uniform_positive: return "uniform-positive";
    case NoiseModel::colored: return "colored";
  }
  return "?";
}

inline NoiseModel parse_noise_model(const std::string& name) {
  for (auto m : {NoiseModel::gaussian_iid, NoiseModel::uniform_positive, NoiseModel::colored}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown noise model '" + name + "'");
}

struct NoiseSpec {
  NoiseModel model = NoiseModel::gaussian_iid;
  double target_snr = 1.0;  // +infinity means no noise
  std::uint64_t seed = 0;
};

/// Amplitude filter 1/sqrt(1 + rho^2), rho the radial frequency index.
inline ImageGrid color_noise(const ImageGrid& white) {
  Spectrum spec = fft_forward(white);
  for (int ky = 0; ky < spec.height; ++ky) {
    const double fy = signed_frequency(ky, spec.height);
    for (int kx = 0; kx < spec.half_width(); ++kx) {
      const double rho2 = fy * fy + static_cast<double>(kx) * kx;
      spec(ky, kx) /= std::sqrt(1.0 + rho2);
    }
  }
  return fft_inverse(spec);
}

/// Unscaled noise draws for a model.
inline ImageGrid noise_field(const Extent& extent, NoiseModel model, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  ImageGrid out(extent.height, extent.width, 0.0);
  if (model == NoiseModel::uniform_positive) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : out.values()) v = uni(rng);
    return out;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : out.values()) v = gauss(rng);
  return model == NoiseModel::colored ? color_noise(out) : out;
}

/// clean + a * noise, with `a` chosen so the measured SNR equals the target.
inline ImageGrid add_noise(const ImageGrid& clean, const NoiseSpec& spec) {
  if (!(spec.target_snr > 0.0)) throw ConfigError("target SNR must be positive");
  double signal = 0.0;
  for (double v : clean.values()) signal += v * v;
  if (!(signal > 0.0)) throw NoMassError("cannot set an SNR for an all-zero clean image");
  if (std::isinf(spec.target_snr)) return clean;
  const ImageGrid noise = noise_field(clean.extent(), spec.model, spec.seed);
  double energy = 0.0;
  for (double v : noise.values()) energy += v * v;
  const double scale = std::sqrt(signal / (spec.target_snr * energy));
  ImageGrid out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += scale * noise.values()[i];
  return out;
}

/// |drow| + |dcol|.
inline int deviation(const PixelCoord& estimate, const PixelCoord& truth) noexcept {
  return std::abs(estimate.row - truth.row) + std::abs(estimate.col - truth.col);
}

// ---------------------------------------------------------------------------
// Sweeps

struct Method {
  std::string name;
  std::function<PixelCoord(const ImageGrid& noisy)> estimate;
};

struct SweepSpec {
  std::vector<NoiseModel> models{NoiseModel::gaussian_iid};
  std::vector<double> snrs{0.5};
  int n_seeds = 10;
  std::uint64_t master_seed = 0;
  int threads = 1;
  /// Wall-clock timings make the table nondeterministic; off by default.
  bool record_timing = false;
};

struct BenchmarkRow {
  std::string method;
  NoiseModel model = NoiseModel::gaussian_iid;
  double snr = 0.0;
  int seed = 0;
  int dev_row = -1;
  int dev_col = -1;
  int dev_sum = -1;  // -1 marks a failed estimate
  double runtime_ms = 0.0;

  bool failed() const noexcept { return dev_sum < 0; }
};

struct CellSummary {
  std::string method;
  NoiseModel model;
  double snr;
  double mean = 0.0;
  double median = 0.0;
  int count = 0;
  int failures = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string format_double(double v, int digits = 17) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;

  /// Mean/median deviation per (method, model, snr), in first-appearance order.
  std::vector<CellSummary> summarize() const {
    std::vector<CellSummary> out;
    std::vector<std::vector<double>> devs;
    for (const auto& row : rows) {
      auto it = std::find_if(out.begin(), out.end(), [&](const CellSummary& s) {
        return s.method == row.method && s.model == row.model && s.snr == row.snr;
      });
      std::size_t idx;
      if (it == out.end()) {
        out.push_back({row.method, row.model, row.snr});
        devs.emplace_back();
        idx = out.size() - 1;
      } else {
        idx = static_cast<std::size_t>(it - out.begin());
      }
      if (row.failed()) {
        ++out[idx].failures;
      } else {
        devs[idx].push_back(row.dev_sum);
      }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].count = static_cast<int>(devs[i].size());
      double total = 0.0;
      for (double d : devs[i]) total += d;
      out[i].mean = devs[i].empty() ? std::nan("") : total / devs[i].size();
      out[i].median = median_of(devs[i]);
    }
    return out;
  }

  const CellSummary& cell(const std::string& method, NoiseModel model, double snr) const {
    summary_cache_ = summarize();
    for (const auto& s : summary_cache_) {
      if (s.method == method && s.model == model && s.snr == snr) return s;
    }
    throw DomainError("no benchmark cell for method " + method);
  }

  void write_csv(std::ostream& os) const {
    os << "method,noise_model,snr,seed,dev_row,dev_col,dev_sum,runtime_ms\n";
    for (const auto& r : rows) {
      os << r.method << ',' << to_string(r.model) << ',' << format_double(r.snr) << ',' << r.seed
         << ',' << r.dev_row << ',' << r.dev_col << ',' << r.dev_sum << ','
         << format_double(r.runtime_ms) << '\n';
    }
  }

 private:
  mutable std::vector<CellSummary> summary_cache_;
};

/// Runs every method on noisy copies of `scene` for each (model, snr, seed)
/// cell. Each cell draws its noise from its own derived seed, so the table is
/// identical for any thread count.
inline BenchmarkTable sweep(const Scene& scene, const std::vector<Method>& methods,
                            const SweepSpec& spec) {
  if (methods.empty()) throw ConfigError("sweep needs at least one method");
  if (spec.n_seeds < 1) throw ConfigError("sweep needs n_seeds >= 1");
  const std::size_t n_cells = spec.models.size() * spec.snrs.size() * spec.n_seeds;
  std::vector<std::vector<BenchmarkRow>> cells(n_cells);
  parallel_for(n_cells, spec.threads, [&](std::size_t cell) {
    const std::size_t seed_idx = cell % spec.n_seeds;
    const std::size_t snr_idx = (cell / spec.n_seeds) % spec.snrs.size();
    const std::size_t model_idx = cell / (spec.n_seeds * spec.snrs.size());
    const NoiseModel model = spec.models[model_idx];
    const double target = spec.snrs[snr_idx];
    const NoiseSpec noise{model, target,
                          derive_seed(spec.master_seed, model_idx, snr_idx, seed_idx)};
    const ImageGrid noisy = add_noise(scene.clean, noise);
    for (const Method& m : methods) {
      BenchmarkRow row{m.name, model, target, static_cast<int>(seed_idx)};
      const auto start = std::chrono::steady_clock::now();
      try {
        const PixelCoord est = m.estimate(noisy);
        row.dev_row = std::abs(est.row - scene.truth.row);
        row.dev_col = std::abs(est.col - scene.truth.col);
        row.dev_sum = deviation(est, scene.truth);
      } catch (const std::exception&) {
        row.dev_row = row.dev_col = row.dev_sum = -1;
      }
      if (spec.record_timing) {
        row.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      }
      cells[cell].push_back(std::move(row));
    }
  });
  BenchmarkTable table;
  for (auto& c : cells) {
    for (auto& r : c) table.rows.push_back(std::move(r));
  }
  return table;
}

}  // namespace racer
