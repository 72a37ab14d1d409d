#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "racer/averaging.hpp"
#include "racer/errors.hpp"
#include "racer/geometry.hpp"
#include "racer/image.hpp"
#include "racer/parallel.hpp"
#include "racer/radial_profile.hpp"

namespace racer {

/// Rule for choosing among equal-cost minimizers.
enum class TieBreak {
  lexicographic,  // smallest (row, col)
};

inline TieBreak parse_tie_break(const std::string& name) {
  if (name == "lexicographic" || name == "lex") return TieBreak::lexicographic;
  throw ConfigError("unknown tie-break rule '" + name + "' (expected lexicographic)");
}

inline const char* to_string(TieBreak) { return "lexicographic"; }

enum class LandscapeKind { scm, scm_normalized, gm, local_gm, cm_variance };

inline const char* to_string(LandscapeKind k) {
  switch (k) {
    case LandscapeKind::scm: return "scm";
    case LandscapeKind::scm_normalized: return "scm-normalized";
    case LandscapeKind::gm: return "gm";
    case LandscapeKind::local_gm: return "local-gm";
    case LandscapeKind::cm_variance: return "cm-variance";
  }
  return "?";
}

inline LandscapeKind parse_landscape_kind(const std::string& name) {
  for (auto k : {LandscapeKind::scm, LandscapeKind::scm_normalized, LandscapeKind::gm,
                 LandscapeKind::local_gm, LandscapeKind::cm_variance}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown landscape kind '" + name + "'");
}

/// Cost of an estimator at every candidate center of `domain` (row-major).
struct Landscape {
  PixelRect domain;
  std::vector<double> cost;
  LandscapeKind kind = LandscapeKind::scm;
  PixelCoord argmin;
  std::optional<double> e_max;

  double at(const PixelCoord& p) const {
    if (!domain.contains(p)) throw DomainError("pixel " + to_string(p) + " outside landscape");
    return cost[domain.index_of(p)];
  }
  double min_cost() const { return at(argmin); }
};

struct CenteringConfig {
  int radius = 1;
  TieBreak tie_break = TieBreak::lexicographic;
  AveragerBackend backend{};
  /// Shift intensities so the minimum is zero before centering.
  bool normalize = true;
  int threads = 1;
  /// Rough center; when set, work on the (4R+1)x(4R+1) window around it.
  std::optional<PixelCoord> initial_center;
};

namespace detail {

/// Index of the minimum; ties resolved by `rule` over the row-major domain.
inline std::size_t argmin_index(const std::vector<double>& values, TieBreak rule) {
  (void)rule;  // row-major scan with strict '<' keeps the lexicographically smallest
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

inline double total_mass(const ImageGrid& image) {
  double total = 0.0;
  for (double v : image.values()) total += v;
  return total;
}

inline void require_mass(const ImageGrid& image) {
  if (!(total_mass(image) > 0.0)) throw NoMassError();
}

/// Nonzero pixels of an image with their values.
struct MassPoint {
  int row;
  int col;
  double value;
};

inline std::vector<MassPoint> support(const ImageGrid& image) {
  std::vector<MassPoint> out;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      if (image(r, c) != 0.0) out.push_back({r, c, image(r, c)});
    }
  }
  return out;
}

/// Distance lookup by |drow|, |dcol| for an extent.
class DistanceTable {
 public:
  DistanceTable(const Extent& extent, Metric metric) : width_(extent.width) {
    table_.resize(extent.size());
    for (int dr = 0; dr < extent.height; ++dr) {
      for (int dc = 0; dc < extent.width; ++dc) {
        table_[static_cast<std::size_t>(dr) * width_ + dc] =
            distance({0, 0}, {dr, dc}, metric);
      }
    }
  }
  double operator()(int dr, int dc) const noexcept {
    return table_[static_cast<std::size_t>(std::abs(dr)) * width_ + std::abs(dc)];
  }

 private:
  int width_;
  std::vector<double> table_;
};

inline Landscape finish(PixelRect domain, std::vector<double> cost, LandscapeKind kind,
                        TieBreak rule) {
  Landscape out{domain, std::move(cost), kind, {}, std::nullopt};
  out.argmin = domain.at(argmin_index(out.cost, rule));
  return out;
}

}  // namespace detail

/// Subtracts the minimum so the smallest value becomes exactly zero.
inline ImageGrid normalize_nonneg(const ImageGrid& image) {
  if (image.empty()) throw DomainError("normalize: empty image");
  const double lo = image.min();
  ImageGrid out = image;
  for (double& v : out.values()) v -= lo;
  return out;
}

/// Intensity-weighted mean position, rounded to the nearest pixel (half away from zero).
inline PixelCoord center_of_mass(const ImageGrid& image) {
  double total = 0.0;
  double rows = 0.0;
  double cols = 0.0;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const double v = image(r, c);
      total += v;
      rows += v * r;
      cols += v * c;
    }
  }
  if (!(total > 0.0)) throw NoMassError();
  return {static_cast<int>(std::round(rows / total)), static_cast<int>(std::round(cols / total))};
}

/// Frechet variance sum_p I(p) |p - x|^2 for every pixel x.
inline Landscape cm_variance_landscape(const ImageGrid& image, int threads = 1) {
  detail::require_mass(image);
  const auto pts = detail::support(image);
  const PixelRect domain{0, image.height() - 1, 0, image.width() - 1};
  std::vector<double> cost(domain.size());
  parallel_for(domain.size(), threads, [&](std::size_t i) {
    const PixelCoord x = domain.at(i);
    double acc = 0.0;
    for (const auto& s : pts) acc += s.value * static_cast<double>(squared_distance({s.row, s.col}, x));
    cost[i] = acc;
  });
  return detail::finish(domain, std::move(cost), LandscapeKind::cm_variance, TieBreak::lexicographic);
}

/// L^G(x) = sum over all pixels p of I(p) d(p, x), for every pixel x.
inline Landscape gm_landscape(const ImageGrid& image, Metric metric = Metric::composed,
                              int threads = 1, TieBreak rule = TieBreak::lexicographic) {
  detail::require_mass(image);
  const auto pts = detail::support(image);
  const detail::DistanceTable dist(image.extent(), metric);
  const PixelRect domain{0, image.height() - 1, 0, image.width() - 1};
  std::vector<double> cost(domain.size());
  parallel_for(domain.size(), threads, [&](std::size_t i) {
    const PixelCoord x = domain.at(i);
    double acc = 0.0;
    for (const auto& s : pts) acc += s.value * dist(s.row - x.row, s.col - x.col);
    cost[i] = acc;
  });
  return detail::finish(domain, std::move(cost), LandscapeKind::gm, rule);
}

/// Grid geometric median: argmin of gm_landscape.
inline PixelCoord geometric_median(const ImageGrid& image, Metric metric = Metric::composed,
                                   int threads = 1, TieBreak rule = TieBreak::lexicographic) {
  return gm_landscape(image, metric, threads, rule).argmin;
}

/// L^R(x) = sum over B_R(x) of I(s) d(s, x), for x in the search grid.
inline Landscape local_gm_landscape(const ImageGrid& image, int radius,
                                    Metric metric = Metric::composed, int threads = 1,
                                    TieBreak rule = TieBreak::lexicographic) {
  const SearchGrid grid = search_grid(image.extent(), radius);
  const RingTable& table = *RingTable::get(radius);
  std::vector<double> cost(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const PixelCoord x = grid.bounds.at(i);
    double acc = 0.0;
    for (const RingOffset& o : table.offsets()) {
      const double d = metric == Metric::composed ? o.ring : o.euclid;
      acc += image(x.row + o.drow, x.col + o.dcol) * d;
    }
    cost[i] = acc;
  });
  return detail::finish(grid.bounds, std::move(cost), LandscapeKind::local_gm, rule);
}

/// max over the search grid of u_p[R].
inline double e_max(const ImageGrid& image, int radius, const AveragerBackend& backend = {},
                    int threads = 1) {
  const SearchGrid grid = search_grid(image.extent(), radius);
  std::vector<double> totals(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    totals[i] = radial_profile(image, grid.bounds.at(i), radius, backend).total();
  });
  const double best = *std::max_element(totals.begin(), totals.end());
  if (!(best > 0.0)) throw NoMassError("no mass inside any disk of radius " + std::to_string(radius));
  return best;
}

/// sum_l (E_max - u[l]), the landscape value before scaling.
inline double scm_cost_raw(const RadialProfile& profile, double e_max) {
  return (profile.radius() + 1) * e_max - profile.sum_u();
}

/// ||u / E_max - 1||_1, the scaled landscape value.
inline double scm_cost_l1(const RadialProfile& profile, double e_max) {
  double acc = 0.0;
  for (double u : profile.u) acc += std::abs(u / e_max - 1.0);
  return acc;
}

/// The surrogate-center-of-mass landscape over the search grid.
///
/// The minimizer is selected on the unscaled value (R+1) E_max - sum_l u_p[l]
/// so that equal sums tie exactly; kind scm_normalized reports the value
/// divided by E_max, which equals ||u_p / E_max - 1||_1.
inline Landscape scm_landscape(const ImageGrid& image, int radius,
                               const AveragerBackend& backend = {}, int threads = 1,
                               LandscapeKind kind = LandscapeKind::scm_normalized,
                               TieBreak rule = TieBreak::lexicographic) {
  if (kind != LandscapeKind::scm && kind != LandscapeKind::scm_normalized) {
    throw ConfigError("scm_landscape: kind must be scm or scm-normalized");
  }
  if (radius < 1) throw ConfigError("radius must be >= 1");
  const SearchGrid grid = search_grid(image.extent(), radius);
  std::vector<double> totals(grid.size());
  std::vector<double> sums(grid.size());
#ifndef NDEBUG
  std::vector<RadialProfile> profiles(grid.size());
#endif
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    RadialProfile prof = backend.kind == Backend::exact_ring
                             ? ring_sums_unchecked(image, grid.bounds.at(i), *RingTable::get(radius))
                             : PolarAverager::get(radius, backend.polar)->profile(image, grid.bounds.at(i));
    totals[i] = prof.total();
    sums[i] = prof.sum_u();
#ifndef NDEBUG
    profiles[i] = std::move(prof);
#endif
  });
  const double emax = *std::max_element(totals.begin(), totals.end());
  if (!(emax > 0.0)) throw NoMassError("no mass inside any disk of radius " + std::to_string(radius));

  std::vector<double> raw(grid.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = (radius + 1) * emax - sums[i];
  Landscape out = detail::finish(grid.bounds, raw, kind, rule);
  out.e_max = emax;
  if (kind == LandscapeKind::scm_normalized) {
    for (double& c : out.cost) c /= emax;
  }
#ifndef NDEBUG
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double l1 = scm_cost_l1(profiles[i], emax);
    const double scaled = raw[i] / emax;
    assert(std::abs(l1 - scaled) <= 1e-9 * std::max(1.0, std::abs(l1)));
  }
#endif
  return out;
}

inline Landscape scm_landscape(const ImageGrid& image, const CenteringConfig& cfg,
                               LandscapeKind kind = LandscapeKind::scm_normalized) {
  return scm_landscape(image, cfg.radius, cfg.backend, cfg.threads, kind, cfg.tie_break);
}

struct CenterResult {
  PixelCoord center;  // in the coordinates of the input image
  Landscape landscape;  // domain in input-image coordinates
  double e_max = 0.0;
  PixelRect window;  // region of the input that was searched
};

/// Window of half-width 2R around `p0`, clipped to the extent.
inline PixelRect centering_window(const Extent& extent, const PixelCoord& p0, int radius) {
  return {std::max(0, p0.row - 2 * radius), std::min(extent.height - 1, p0.row + 2 * radius),
          std::max(0, p0.col - 2 * radius), std::min(extent.width - 1, p0.col + 2 * radius)};
}

/// Robust translational centering: the argmin of the scaled sCM landscape.
inline CenterResult scm_center(const ImageGrid& image, const CenteringConfig& cfg) {
  if (cfg.radius < 1) throw ConfigError("radius must be >= 1");
  PixelRect window{0, image.height() - 1, 0, image.width() - 1};
  if (cfg.initial_center) {
    if (!image.extent().contains(*cfg.initial_center)) {
      throw DomainError("initial center " + to_string(*cfg.initial_center) + " outside image");
    }
    window = centering_window(image.extent(), *cfg.initial_center, cfg.radius);
  }
  ImageGrid work = cfg.initial_center ? image.crop(window) : image;
  if (cfg.normalize) work = normalize_nonneg(work);
  Landscape land = scm_landscape(work, cfg, LandscapeKind::scm_normalized);
  auto shift = [&](PixelCoord p) { return PixelCoord{p.row + window.row0, p.col + window.col0}; };
  land.argmin = shift(land.argmin);
  land.domain.row0 += window.row0;
  land.domain.row1 += window.row0;
  land.domain.col0 += window.col0;
  land.domain.col1 += window.col0;
  const double emax = *land.e_max;
  return {land.argmin, std::move(land), emax, window};
}

/// Per-candidate evaluation of the global-minimum condition relating the
/// geometric median to the sCM landscape.
struct ConditionCheck {
  PixelRect domain;
  std::vector<char> holds;  // per search-grid member; true at the median itself
  bool global = false;
  PixelCoord median;
};

/// For every x != median in the search grid, checks
///   sum_P ceil|median - s| I(s) < sum_{B_R(x)} ceil|x - s| I(s) + (R+1) sum_{P \ B_R(x)} I(s).
inline ConditionCheck gm_condition(const ImageGrid& image, int radius,
                                  std::optional<PixelCoord> median = std::nullopt,
                                  int threads = 1) {
  const SearchGrid grid = search_grid(image.extent(), radius);
  const PixelCoord mu = median ? *median : geometric_median(image, Metric::composed, threads);
  const auto pts = detail::support(image);
  double lhs = 0.0;
  double total = 0.0;
  for (const auto& s : pts) {
    lhs += s.value * composed_distance(mu, {s.row, s.col});
    total += s.value;
  }
  const RingTable& table = *RingTable::get(radius);
  ConditionCheck out{grid.bounds, std::vector<char>(grid.size(), 1), true, mu};
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const PixelCoord x = grid.bounds.at(i);
    if (x == mu) return;
    double inside_weighted = 0.0;
    double inside = 0.0;
    for (const RingOffset& o : table.offsets()) {
      const double v = image(x.row + o.drow, x.col + o.dcol);
      inside_weighted += o.ring * v;
      inside += v;
    }
    out.holds[i] = lhs < inside_weighted + (radius + 1) * (total - inside) ? 1 : 0;
  });
  for (char h : out.holds) out.global = out.global && h;
  return out;
}

}  // namespace racer
