#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "racer/emd.hpp"
#include "racer/estimators.hpp"

using namespace racer;

namespace {

ImageGrid point_masses(Extent e, const std::vector<PixelCoord>& pts) {
  ImageGrid img(e.height, e.width, 0.0);
  for (const auto& p : pts) img[p] += 1.0;
  return img;
}

// Unit masses on both sides: some optimal plan is a permutation.
double assignment_cost(const std::vector<PixelCoord>& a, const std::vector<PixelCoord>& b) {
  std::vector<int> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += oracle::dist(a[i], b[perm[i]]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

}  // namespace

TEST(DeltaImage, Examples) {
  ImageGrid d(3, 3, 0.0);
  d(1, 2) = 4.0;
  const DeltaImage same = delta_image(d, {1, 2});
  EXPECT_EQ(same.to_image(), d);

  const DeltaImage m = delta_image(ImageGrid::from_rows({{1, -2}, {3, 0}}), {0, 0});
  EXPECT_EQ(m.mass, 6.0);
  EXPECT_EQ(m.location, (PixelCoord{0, 0}));

  std::mt19937_64 rng(1);
  const ImageGrid img = oracle::random_dyadic(rng, 4, 4);
  double abs_sum = 0.0;
  for (double v : img.values()) abs_sum += std::abs(v);
  EXPECT_EQ(delta_image(img, {3, 1}).mass, abs_sum);
  EXPECT_THROW(delta_image(img, {4, 0}), DomainError);
}

TEST(EmdToDelta, Examples) {
  ImageGrid d(6, 6, 0.0);
  d(2, 3) = 5.0;
  EXPECT_EQ(emd_to_delta(d, {2, 3}), 0.0);

  ImageGrid one(8, 8, 0.0);
  one(0, 5) = 1.0;
  EXPECT_EQ(emd_to_delta(one, {4, 2}), 5.0);  // 3-4-5 triangle
  EXPECT_THROW(emd_to_delta(ImageGrid(3, 3, 0.0), {1, 1}), NoMassError);
}

TEST(EmdToDelta, IsGmCostOverMass) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const ImageGrid img = oracle::random_dyadic(rng, 6, 5);
    if (img.sum() == 0.0) continue;
    const Landscape gm = gm_landscape(img, Metric::composed);
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        EXPECT_NEAR(emd_to_delta(img, {r, c}), gm.at({r, c}) / img.sum(), 1e-12);
      }
    }
  }
}

TEST(EmdExact, Examples) {
  std::mt19937_64 rng(3);
  const ImageGrid img = oracle::random_dyadic(rng, 5, 5);
  EXPECT_EQ(emd_exact(img, img), 0.0);

  EXPECT_EQ(emd_exact(point_masses({8, 8}, {{0, 0}}), point_masses({8, 8}, {{6, 7}})), 10.0);
  EXPECT_EQ(emd_exact(point_masses({8, 8}, {{0, 0}}), point_masses({8, 8}, {{6, 7}}), Metric::euclidean),
            std::hypot(6.0, 7.0));
}

TEST(EmdExact, RejectsOversizedAndEmptyInput) {
  EXPECT_THROW(emd_exact(ImageGrid(9, 3, 1.0), ImageGrid(9, 3, 1.0)), OracleSizeError);
  EXPECT_THROW(emd_exact(ImageGrid(3, 3, 0.0), ImageGrid(3, 3, 1.0)), NoMassError);
  EXPECT_THROW(emd_exact(ImageGrid(3, 3, 1.0), ImageGrid(3, 4, 1.0)), DomainError);
}

TEST(EmdExact, MatchesBruteForceAssignment) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> coord(0, 7);
  std::uniform_int_distribution<int> count(1, 6);
  for (int t = 0; t < 60; ++t) {
    const int k = count(rng);
    std::vector<PixelCoord> a, b;
    for (int i = 0; i < k; ++i) {
      a.push_back({coord(rng), coord(rng)});
      b.push_back({coord(rng), coord(rng)});
    }
    const Extent e{8, 8};
    EXPECT_NEAR(emd_exact(point_masses(e, a), point_masses(e, b)), assignment_cost(a, b), 1e-9) << "trial " << t;
  }
}

TEST(EmdExact, SymmetricForEqualMasses) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    ImageGrid a = oracle::random_dyadic(rng, 6, 6);
    ImageGrid b = oracle::random_dyadic(rng, 6, 6);
    if (a.sum() == 0.0 || b.sum() == 0.0) continue;
    const double scale = a.sum() / b.sum();
    for (double& v : b.values()) v *= scale;
    EXPECT_NEAR(emd_exact(a, b), emd_exact(b, a), 1e-9 * std::max(1.0, emd_exact(a, b)));
  }
}

TEST(EmdExact, ClosedFormMatchesTransport) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> side(1, 8);
  for (int t = 0; t < 40; ++t) {
    const ImageGrid img = oracle::random_dyadic(rng, side(rng), side(rng));
    if (img.sum() == 0.0) continue;
    std::uniform_int_distribution<int> pr(0, img.height() - 1), pc(0, img.width() - 1);
    const PixelCoord p{pr(rng), pc(rng)};
    for (Metric m : {Metric::composed, Metric::euclidean}) {
      const double closed = emd_to_delta(img, p, m);
      const double exact = emd_exact(img, delta_image(img, p).to_image(), m);
      EXPECT_NEAR(closed, exact, 1e-9 * std::max(1.0, exact)) << "trial " << t;
    }
  }
}

TEST(EmdExact, DeltaAtScmCenterMinimizesTransport) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 8; ++t) {
    const oracle::BlobInstance inst = oracle::small_instance(rng);
    const PixelCoord mu_s = scm_landscape(inst.image, inst.R).argmin;
    EXPECT_EQ(mu_s, inst.gm);
    const double at_center = emd_exact(inst.image, delta_image(inst.image, mu_s).to_image());
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 7; ++c) {
        const double other = emd_exact(inst.image, delta_image(inst.image, {r, c}).to_image());
        if (PixelCoord{r, c} != mu_s) {
          EXPECT_LT(at_center, other);
        }
      }
    }
  }
}
