#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "racer/averaging.hpp"
#include "racer/baselines.hpp"
#include "racer/errors.hpp"
#include "racer/estimators.hpp"
#include "racer/io.hpp"
#include "racer/synthetic.hpp"

namespace racer {

/// Everything the standard methods need to know about a benchmark scene.
struct BenchContext {
  const Scene* scene = nullptr;
  int radius = 1;           // sCM / local-GM radius bound
  int object_radius = 1;    // known object size, sets the Gaussian template width
  std::uint64_t seed = 0;   // template noise
  double template_snr_high = 2.5;
  double template_snr_low = 0.5;
  double lowpass_sigma = 2.0;
};

inline const std::vector<std::string>& standard_method_names() {
  static const std::vector<std::string> names{"scm",           "scm-polar",        "cm",
                                              "gm",            "local-gm",         "xcorr-gaussian",
                                              "xcorr-noisy-high", "xcorr-noisy-low", "xcorr-lowpass"};
  return names;
}

/// Square window of side 2R+1 around the ground truth, clipped to the image.
inline Template object_template(const Scene& scene, int radius) {
  const Extent e = scene.clean.extent();
  const PixelRect rect{std::max(0, scene.truth.row - radius), std::min(e.height - 1, scene.truth.row + radius),
                       std::max(0, scene.truth.col - radius), std::min(e.width - 1, scene.truth.col + radius)};
  return {scene.object_only.crop(rect), {scene.truth.row - rect.row0, scene.truth.col - rect.col0}};
}

inline Template noisy_template(const Template& clean, double snr, std::uint64_t seed) {
  return {add_noise(clean.values, {NoiseModel::gaussian_iid, snr, seed}), clean.origin};
}

inline Method xcorr_method(std::string name, Template tmpl) {
  return {std::move(name), [tmpl = std::move(tmpl)](const ImageGrid& noisy) {
            return cross_correlation_center(noisy, tmpl, -1, CorrelationMethod::fourier);
          }};
}

inline Method make_method(const std::string& name, const BenchContext& ctx) {
  if (!ctx.scene) throw ConfigError("benchmark context has no scene");
  const int R = ctx.radius;
  if (name == "scm" || name == "scm-polar") {
    CenteringConfig cfg;
    cfg.radius = R;
    cfg.backend.kind = name == "scm" ? Backend::exact_ring : Backend::polar_quadrature;
    return {name, [cfg](const ImageGrid& noisy) { return scm_center(noisy, cfg).center; }};
  }
  if (name == "cm") {
    return {name, [](const ImageGrid& noisy) { return center_of_mass(normalize_nonneg(noisy)); }};
  }
  if (name == "gm") {
    return {name, [](const ImageGrid& noisy) { return geometric_median(normalize_nonneg(noisy)); }};
  }
  if (name == "local-gm") {
    return {name, [R](const ImageGrid& noisy) {
              return local_gm_landscape(normalize_nonneg(noisy), R).argmin;
            }};
  }
  const Template clean = object_template(*ctx.scene, R);
  if (name == "xcorr-gaussian") {
    const int side = 2 * R + 1;
    Template g = gaussian_template({side, side}, ctx.object_radius);
    return xcorr_method(name, std::move(g));
  }
  if (name == "xcorr-noisy-high") {
    return xcorr_method(name, noisy_template(clean, ctx.template_snr_high, derive_seed(ctx.seed, 0x7e11)));
  }
  if (name == "xcorr-noisy-low") {
    return xcorr_method(name, noisy_template(clean, ctx.template_snr_low, derive_seed(ctx.seed, 0x7e12)));
  }
  if (name == "xcorr-lowpass") {
    Template t = noisy_template(clean, ctx.template_snr_high, derive_seed(ctx.seed, 0x7e11));
    t.values = gaussian_blur(t.values, ctx.lowpass_sigma);
    return xcorr_method(name, std::move(t));
  }
  throw ConfigError("unknown method '" + name + "'");
}

inline std::vector<Method> make_methods(const std::vector<std::string>& names, const BenchContext& ctx) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(make_method(n, ctx));
  return out;
}

// ---------------------------------------------------------------------------
// Config files

struct BenchConfig {
  SceneSpec scene;
  int radius = 0;  // 0: object radius + 3
  std::vector<std::string> methods{"scm", "cm", "gm", "xcorr-gaussian"};
  SweepSpec sweep;
  double template_snr_high = 2.5;
  double template_snr_low = 0.5;
  double lowpass_sigma = 2.0;

  int effective_radius() const { return radius > 0 ? radius : scene.object.radius + 3; }
};

namespace detail {

inline double parse_snr(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("invalid SNR value " + j.dump());
}

inline PixelCoord parse_pair(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be a [row, col] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

inline ObjectSpec parse_object(const nlohmann::json& j, const std::filesystem::path& base) {
  ObjectSpec o;
  o.kind = parse_object_kind(j.value("kind", std::string("disk")));
  o.radius = j.value("radius", 10);
  o.intensity = j.value("intensity", 1.0);
  if (o.kind == ObjectKind::raster) {
    if (!j.contains("path")) throw ConfigError("raster object needs a 'path'");
    std::filesystem::path p = j["path"].get<std::string>();
    if (p.is_relative()) p = base / p;
    o.raster = read_image(p);
  }
  if (o.radius < 1) throw ConfigError("object radius must be >= 1");
  return o;
}

}  // namespace detail

/// Parses a benchmark description. Relative raster paths resolve against `base`.
inline BenchConfig parse_bench_config(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  BenchConfig cfg;
  try {
    if (j.contains("extent")) {
      const PixelCoord e = detail::parse_pair(j["extent"], "extent");
      cfg.scene.extent = {e.row, e.col};
    }
    if (j.contains("object")) cfg.scene.object = detail::parse_object(j["object"], base);
    if (j.contains("shift")) cfg.scene.shift = detail::parse_pair(j["shift"], "shift");
    if (j.contains("partial")) {
      const auto& p = j["partial"];
      cfg.scene.partial = PartialObject{detail::parse_object(p.at("object"), base),
                                        detail::parse_pair(p.at("offset"), "partial offset")};
    }
    cfg.radius = j.value("radius", 0);
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("noise_models")) {
      cfg.sweep.models.clear();
      for (const auto& m : j["noise_models"]) cfg.sweep.models.push_back(parse_noise_model(m.get<std::string>()));
    }
    if (j.contains("snrs")) {
      cfg.sweep.snrs.clear();
      for (const auto& s : j["snrs"]) cfg.sweep.snrs.push_back(detail::parse_snr(s));
    }
    cfg.sweep.n_seeds = j.value("n_seeds", cfg.sweep.n_seeds);
    cfg.sweep.master_seed = j.value("seed", cfg.sweep.master_seed);
    cfg.template_snr_high = j.value("template_snr_high", cfg.template_snr_high);
    cfg.template_snr_low = j.value("template_snr_low", cfg.template_snr_low);
    cfg.lowpass_sigma = j.value("lowpass_sigma", cfg.lowpass_sigma);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad benchmark config: ") + e.what());
  }
  if (cfg.sweep.models.empty() || cfg.sweep.snrs.empty()) throw ConfigError("empty noise model or SNR list");
  for (double s : cfg.sweep.snrs) {
    if (!(s > 0.0)) throw ConfigError("SNR values must be positive");
  }
  return cfg;
}

/// Renders the scene and runs the configured sweep.
inline BenchmarkTable run_bench(const BenchConfig& cfg, int threads = 1, bool record_timing = false) {
  const Scene scene = render_scene(cfg.scene, threads);
  BenchContext ctx;
  ctx.scene = &scene;
  ctx.radius = cfg.effective_radius();
  ctx.object_radius = cfg.scene.object.radius;
  ctx.seed = cfg.sweep.master_seed;
  ctx.template_snr_high = cfg.template_snr_high;
  ctx.template_snr_low = cfg.template_snr_low;
  ctx.lowpass_sigma = cfg.lowpass_sigma;
  SweepSpec spec = cfg.sweep;
  spec.threads = threads;
  spec.record_timing = record_timing;
  return sweep(scene, make_methods(cfg.methods, ctx), spec);
}

}  // namespace racer
