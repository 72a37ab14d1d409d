#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "racer/estimators.hpp"
#include "racer/synthetic.hpp"

using namespace racer;

namespace {

// Search grid fixed at 9x9 candidates; only R grows.
constexpr int kGrid = 9;

ImageGrid scene_for(int R) {
  const int side = 2 * R + kGrid;
  SceneSpec spec;
  spec.extent = {side, side};
  spec.object = {ObjectKind::blob, R - 2, 1.0, {}};
  spec.shift = {1, -2};
  return add_noise(render_scene(spec).clean, {NoiseModel::gaussian_iid, 0.5, 11});
}

double best_seconds(const ImageGrid& img, int R, AveragerBackend backend) {
  CenteringConfig cfg;
  cfg.radius = R;
  cfg.backend = backend;
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const CenterResult res = scm_center(img, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    EXPECT_EQ(res.landscape.cost.size(), static_cast<std::size_t>(kGrid * kGrid));
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

// Fitted exponent of time against R over {16, 32, 64}.
double growth_exponent(AveragerBackend backend) {
  std::vector<double> t;
  for (int R : {16, 32, 64}) t.push_back(best_seconds(scene_for(R), R, backend));
  return std::log(t[2] / t[0]) / std::log(4.0);
}

}  // namespace

TEST(Complexity, ExactRingGrowsAtMostQuadraticallyInRadius) {
  const double k = growth_exponent(AveragerBackend{});
  RecordProperty("exponent", std::to_string(k));
  EXPECT_LE(k, 2.0 + 0.5) << "fitted exponent " << k;
}

TEST(Complexity, PolarGrowsAtMostCubicallyInRadius) {
  AveragerBackend polar;
  polar.kind = Backend::polar_quadrature;
  const double k = growth_exponent(polar);
  RecordProperty("exponent", std::to_string(k));
  EXPECT_LE(k, 3.0 + 0.5) << "fitted exponent " << k;
}
