#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "racer/baselines.hpp"
#include "racer/estimators.hpp"
#include "racer/synthetic.hpp"

using namespace racer;

namespace {

ImageGrid place(const Template& t, Extent e, PixelCoord origin_at) {
  ImageGrid out(e.height, e.width, 0.0);
  for (int i = 0; i < t.values.height(); ++i) {
    for (int j = 0; j < t.values.width(); ++j) {
      out(origin_at.row - t.origin.row + i, origin_at.col - t.origin.col + j) = t.values(i, j);
    }
  }
  return out;
}

ImageGrid rotate90(const ImageGrid& img) {
  const int n = img.height();
  ImageGrid out(n, n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out(c, n - 1 - r) = img(r, c);
  }
  return out;
}

ImageGrid average(const std::vector<ImageGrid>& imgs) {
  ImageGrid out(imgs[0].height(), imgs[0].width(), 0.0);
  for (const auto& im : imgs) {
    for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] += im.values()[k] / imgs.size();
  }
  return out;
}

}  // namespace

TEST(GaussianTemplate, Values) {
  const Template t = gaussian_template({21, 21}, 6.0);
  EXPECT_EQ(t.origin, (PixelCoord{10, 10}));
  EXPECT_DOUBLE_EQ(t.values(10, 10), 1.0);
  EXPECT_NEAR(t.values(10, 13), std::exp(-0.5), 1e-15);
  EXPECT_EQ(t.values(10, 13), t.values(7, 10));
  EXPECT_EQ(t.values(10, 13), t.values(13, 10));
  EXPECT_EQ(t.values(10, 13), t.values(10, 7));
  EXPECT_THROW(gaussian_template({5, 5}, 0.0), ConfigError);
}

TEST(CrossCorrelation, PaddedTemplateGivesZeroShift) {
  std::mt19937_64 rng(1);
  const Template t{oracle::random_dyadic(rng, 7, 7, 0.0), {3, 3}};
  const ImageGrid test = place(t, {21, 21}, {10, 10});
  EXPECT_EQ(cross_correlation_shift(test, t), (Shift{0, 0}));
  EXPECT_EQ(cross_correlation_shift(test, t, -1, CorrelationMethod::fourier), (Shift{0, 0}));
}

TEST(CrossCorrelation, EmbeddedOffsetRecoveredExactly) {
  std::mt19937_64 rng(2);
  const Template t{oracle::random_dyadic(rng, 9, 9, 0.2), {4, 4}};
  const ImageGrid test = place(t, {31, 31}, {15 + 7, 15 - 3});
  EXPECT_EQ(cross_correlation_shift(test, t), (Shift{7, -3}));
  EXPECT_EQ(oracle::xcorr_shift(test, t), (Shift{7, -3}));
  EXPECT_EQ(cross_correlation_shift(test, t, -1, CorrelationMethod::fourier), (Shift{7, -3}));
}

TEST(CrossCorrelation, MatchesExhaustiveOracleOnSmallInstances) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> side(1, 9);
  for (int t = 0; t < 200; ++t) {
    const int h = side(rng), w = side(rng);
    const ImageGrid test = oracle::random_dyadic(rng, h, w);
    std::uniform_int_distribution<int> th(1, h), tw(1, w);
    const int a = th(rng), b = tw(rng);
    std::uniform_int_distribution<int> orow(0, a - 1), ocol(0, b - 1);
    const Template tmpl{oracle::random_dyadic(rng, a, b, 0.1), {orow(rng), ocol(rng)}};
    ASSERT_EQ(cross_correlation_shift(test, tmpl), oracle::xcorr_shift(test, tmpl));
  }
}

TEST(CrossCorrelation, FourierMapAgreesWithSpatial) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    ImageGrid test(37, 29), tmpl(11, 8);
    for (double& v : test.values()) v = g(rng);
    for (double& v : tmpl.values()) v = g(rng);
    const ImageGrid a = correlation_map(test, tmpl, CorrelationMethod::spatial);
    const ImageGrid b = correlation_map(test, tmpl, CorrelationMethod::fourier);
    double scale = 0.0;
    for (double v : a.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-6 * scale);
  }
}

TEST(CrossCorrelation, ShiftEquivariance) {
  std::mt19937_64 rng(5);
  const Template t{oracle::random_dyadic(rng, 7, 7, 0.0), {3, 3}};
  const ImageGrid test = place(t, {41, 41}, {22, 17});
  const Shift base = cross_correlation_shift(test, t);
  for (const auto& [a, b] : {std::pair{3, -4}, {-6, 2}, {0, 9}}) {
    const Shift s = cross_correlation_shift(shift_image(test, a, b), t);
    EXPECT_EQ(s.drow, base.drow + a);
    EXPECT_EQ(s.dcol, base.dcol + b);
  }
}

TEST(CrossCorrelation, MaxShiftRestrictsSearch) {
  std::mt19937_64 rng(6);
  const Template t{oracle::random_dyadic(rng, 5, 5, 0.0), {2, 2}};
  const ImageGrid test = place(t, {31, 31}, {15 + 9, 15});
  EXPECT_EQ(cross_correlation_shift(test, t), (Shift{9, 0}));
  const Shift s = cross_correlation_shift(test, t, 4);
  EXPECT_LE(std::abs(s.drow), 4);
  EXPECT_LE(std::abs(s.dcol), 4);
}

TEST(CrossCorrelation, TemplateLargerThanTestIsDomainError) {
  EXPECT_THROW(cross_correlation_shift(ImageGrid(5, 5, 1.0), {ImageGrid(6, 3, 1.0), {0, 0}}), DomainError);
}

TEST(Rfa, IdenticalCenteredImagesConvergeImmediately) {
  SceneSpec spec;
  spec.extent = {41, 41};
  spec.object = {ObjectKind::blob, 8, 1.0, {}};
  const Scene s = render_scene(spec);
  const RfaResult r = rfa_align({s.clean, s.clean});
  EXPECT_EQ(r.iterations, 1);
  for (const auto& sh : r.shifts) EXPECT_EQ(sh, (Shift{0, 0}));
}

TEST(Rfa, RecoversKnownShiftsUpToCommonTranslation) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> u(-5, 5);
  SceneSpec spec;
  spec.extent = {45, 45};
  spec.object = {ObjectKind::hedgehog, 10, 1.0, {}};
  const Scene s = render_scene(spec);
  std::vector<ImageGrid> imgs;
  std::vector<Shift> truth;
  for (int i = 0; i < 6; ++i) {
    truth.push_back({u(rng), u(rng)});
    imgs.push_back(shift_image(s.clean, truth.back().drow, truth.back().dcol));
  }
  const RfaResult r = rfa_align(imgs);
  EXPECT_LE(r.iterations, RfaConfig{}.max_iters);
  for (std::size_t i = 1; i < imgs.size(); ++i) {
    EXPECT_LE(std::abs((truth[i].drow + r.shifts[i].drow) - (truth[0].drow + r.shifts[0].drow)), 1);
    EXPECT_LE(std::abs((truth[i].dcol + r.shifts[i].dcol) - (truth[0].dcol + r.shifts[0].dcol)), 1);
  }
  // aligned pairs correlate best at zero offset
  const ImageGrid a = shift_image(imgs[0], r.shifts[0].drow, r.shifts[0].dcol);
  for (std::size_t i = 1; i < imgs.size(); ++i) {
    const ImageGrid b = shift_image(imgs[i], r.shifts[i].drow, r.shifts[i].dcol);
    const Template t{b.crop({10, 34, 10, 34}), {12, 12}};
    const Shift peak = cross_correlation_shift(a, t);
    EXPECT_LE(std::abs(peak.drow) + std::abs(peak.dcol), 1);
  }
}

TEST(Rfa, IsDeterministicAndValidatesInput) {
  std::mt19937_64 rng(8);
  std::vector<ImageGrid> imgs;
  for (int i = 0; i < 4; ++i) imgs.push_back(oracle::random_dyadic(rng, 25, 25, 0.7));
  RfaConfig cfg;
  const RfaResult a = rfa_align(imgs, cfg);
  cfg.threads = 3;
  const RfaResult b = rfa_align(imgs, cfg);
  EXPECT_EQ(a.shifts, b.shifts);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_THROW(rfa_align({imgs[0]}), DomainError);
  EXPECT_THROW(rfa_align({imgs[0], ImageGrid(24, 25)}), DomainError);
  cfg.max_iters = 0;
  EXPECT_THROW(rfa_align(imgs, cfg), ConfigError);
}

TEST(Rfa, RotatedCopiesAverageLessSharplyThanIndependentCentering) {
  SceneSpec spec;
  spec.extent = {61, 61};
  spec.object = {ObjectKind::elongated, 16, 1.0, {}};
  spec.shift = {7, -3};
  const Scene s = render_scene(spec);
  const std::vector<ImageGrid> imgs{s.clean, rotate90(s.clean)};
  const int R = 20;
  // sharpness: how much of the average's mass concentrates around its best center
  auto blur_of = [&](const ImageGrid& avg) { return scm_landscape(avg, R).min_cost(); };

  const RfaResult rfa = rfa_align(imgs);
  std::vector<ImageGrid> by_rfa, by_scm;
  CenteringConfig cfg;
  cfg.radius = R;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    by_rfa.push_back(shift_image(imgs[i], rfa.shifts[i].drow, rfa.shifts[i].dcol));
    const PixelCoord c = scm_center(imgs[i], cfg).center;
    const PixelCoord o = imgs[i].extent().origin();
    by_scm.push_back(shift_image(imgs[i], o.row - c.row, o.col - c.col));
  }
  EXPECT_GT(blur_of(average(by_rfa)), blur_of(average(by_scm)));
}

// Every particle has a clipped neighbour just outside the sCM disk. sCM is exact
// on each image; RFA correlates the neighbours too.
TEST(Rfa, NearbyPartialObjectsMisleadRfaButNotScm) {
  const Extent e{61, 61};
  const int rad = 10;
  const int R = rad + 2;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> jitter(-4, 4);
  int rfa_total = 0, scm_total = 0, stacks = 0;
  for (int trial = 0; trial < 60; ++trial) {
    SceneSpec spec;
    spec.extent = e;
    spec.object = {ObjectKind::blob, rad, 1.0, {}};
    std::vector<ImageGrid> imgs;
    std::vector<PixelCoord> where;
    bool admissible = true;
    for (int i = 0; i < 4 && admissible; ++i) {
      spec.shift = {jitter(rng), jitter(rng)};
      const double ang = 2.0 * std::numbers::pi * unit(rng);
      const double dist = R + rad + 1 + 6.0 * unit(rng);
      const PixelCoord off{static_cast<int>(std::lround(dist * std::sin(ang))),
                           static_cast<int>(std::lround(dist * std::cos(ang)))};
      spec.partial = PartialObject{{ObjectKind::blob, rad, 0.5 + 0.5 * unit(rng), {}}, off};
      Scene s;
      try {
        s = render_scene(spec);
      } catch (const DomainError&) {
        admissible = false;
        break;
      }
      if (std::abs(e_max(s.clean, R) - s.object_only.sum()) > 1e-9) admissible = false;
      for (int r = 0; r < e.height && admissible; ++r)
        for (int c = 0; c < e.width; ++c)
          if (s.clean(r, c) != s.object_only(r, c) && composed_distance(s.truth, {r, c}) <= R) {
            admissible = false;
            break;
          }
      imgs.push_back(s.clean);
      where.push_back(s.truth);
    }
    if (!admissible) continue;
    ++stacks;
    const RfaResult rfa = rfa_align(imgs);
    CenteringConfig cfg;
    cfg.radius = R;
    const PixelCoord o = e.origin();
    std::vector<PixelCoord> rfa_pos, scm_pos;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      rfa_pos.push_back({where[i].row + rfa.shifts[i].drow, where[i].col + rfa.shifts[i].dcol});
      const PixelCoord c = scm_center(imgs[i], cfg).center;
      scm_pos.push_back({where[i].row + o.row - c.row, where[i].col + o.col - c.col});
    }
    for (std::size_t i = 1; i < imgs.size(); ++i) {
      rfa_total += deviation(rfa_pos[i], rfa_pos[0]);
      scm_total += deviation(scm_pos[i], scm_pos[0]);
    }
  }
  ASSERT_GE(stacks, 20);
  EXPECT_EQ(scm_total, 0);
  EXPECT_GT(rfa_total, scm_total);
}
