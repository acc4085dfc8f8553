#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "crowdnav/gridmap.hpp"

using namespace crowdnav;

namespace {

MixtureModel single(const Vec2& mean, const Mat2& cov) { return MixtureModel({{mean, cov, 1.0}}); }

}  // namespace

TEST(Density, StandardNormalPeak) {
  EXPECT_NEAR(evaluate_density(single(Vec2::Zero(), Mat2::Identity()), Vec2::Zero()), 1.0 / (2 * std::numbers::pi),
              1e-15);
}

TEST(Density, SymmetricPairAtMidpoint) {
  MixtureModel two({{Vec2(1, 0), Mat2::Identity(), 0.5}, {Vec2(-1, 0), Mat2::Identity(), 0.5}});
  const double one = evaluate_density(single(Vec2(1, 0), Mat2::Identity()), Vec2::Zero());
  EXPECT_NEAR(evaluate_density(two, Vec2::Zero()), one, 1e-15);
}

TEST(Density, TightComponentPeakAndMass) {
  const Mat2 cov = Mat2::Identity() * 0.25;
  const auto m = single(Vec2(3, 4), cov);
  EXPECT_NEAR(evaluate_density(m, Vec2(3, 4)), 1.0 / (2 * std::numbers::pi * 0.25), 1e-12);
  // Midpoint quadrature over +-5 sigma integrates to one.
  const double h = 0.01;
  double total = 0.0;
  for (double x = 0.5 + h / 2; x < 5.5; x += h)
    for (double y = 1.5 + h / 2; y < 6.5; y += h) total += evaluate_density(m, Vec2(x, y)) * h * h;
  EXPECT_NEAR(total, 1.0, 1e-4);
}

TEST(Density, SingularCovarianceIsDegenerate) {
  Mat2 cov;
  cov << 1, 1, 1, 1;
  EXPECT_THROW(evaluate_density(single(Vec2::Zero(), cov), Vec2::Zero()), DegenerateComponent);
}

TEST(Mixture, RejectsBadWeights) {
  EXPECT_THROW(MixtureModel({{Vec2::Zero(), Mat2::Identity(), 0.7}}), std::invalid_argument);
  EXPECT_THROW(MixtureModel({{Vec2::Zero(), Mat2::Identity(), -0.5}, {Vec2::Zero(), Mat2::Identity(), 1.5}}),
               std::invalid_argument);
}

TEST(Rasterize, UniformLimit) {
  GridSpec spec(10.0, 10);
  auto g = rasterize_normalize(single(Vec2(5, 5), Mat2::Identity() * 1e8), spec);
  for (double v : g.values()) EXPECT_NEAR(v, 0.01, 1e-8);
}

TEST(Rasterize, DeltaLimit) {
  GridSpec spec(10.0, 10);
  auto g = rasterize_normalize(single(spec.cell_center(3, 7), Mat2::Identity() * 1e-4), spec);
  EXPECT_NEAR(g.at(3, 7), 1.0, 1e-12);
  EXPECT_NEAR(g.sum() - g.at(3, 7), 0.0, 1e-12);
}

TEST(Rasterize, CenteredNormalMatchesBruteForce) {
  GridSpec spec(20.0, 100);
  const auto m = single(Vec2(10, 10), Mat2::Identity());
  auto g = rasterize_normalize(m, spec);
  EXPECT_NEAR(g.sum(), 1.0, 1e-12);
  // Independent brute force over every cell with the closed form.
  std::vector<double> raw(spec.cell_count());
  double total = 0.0;
  for (int r = 0; r < 100; ++r)
    for (int c = 0; c < 100; ++c) {
      const double x = 0.1 + 0.2 * c - 10, y = 0.1 + 0.2 * r - 10;
      raw[r * 100 + c] = std::exp(-0.5 * (x * x + y * y)) / (2 * std::numbers::pi);
      total += raw[r * 100 + c];
    }
  double worst = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) worst = std::max(worst, std::abs(raw[k] / total - g.values()[k]));
  EXPECT_LT(worst, 1e-15);
  EXPECT_DOUBLE_EQ(g.max(), g.at(50, 50));
}

TEST(Rasterize, FarAwayComponentIsEmpty) {
  GridSpec spec(10.0, 10);
  EXPECT_THROW(rasterize_normalize(single(Vec2(1e4, 1e4), Mat2::Identity() * 0.01), spec), EmptyRaster);
}

TEST(Rasterize, RandomMixturesNormalizeAndRescale) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0, 20), var(0.05, 4.0), w(0.1, 1.0);
  GridSpec spec(20.0, 40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GaussianComponent> comps(1 + trial % 6);
    double total = 0;
    for (auto& c : comps) {
      c.mean = Vec2(pos(rng), pos(rng));
      c.covariance = Mat2::Identity() * var(rng);
      c.weight = w(rng);
      total += c.weight;
    }
    for (auto& c : comps) c.weight /= total;
    auto raw = rasterize_raw(MixtureModel(comps), spec);
    auto a = ProbabilityGrid::normalized(spec, raw);
    EXPECT_NEAR(a.sum(), 1.0, 1e-9);
    for (double& v : raw) v *= 37.5;
    auto b = ProbabilityGrid::normalized(spec, raw);
    for (std::size_t k = 0; k < raw.size(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-12);
  }
}

TEST(Lookup, NearestCell) {
  GridSpec spec(10.0, 10);
  auto delta = rasterize_normalize(single(spec.cell_center(3, 7), Mat2::Identity() * 1e-4), spec);
  EXPECT_NEAR(probability_at(delta, spec.cell_center(3, 7)), 1.0, 1e-12);
  EXPECT_NEAR(probability_at(delta, spec.cell_center(0, 0)), 0.0, 1e-12);
  auto uni = ProbabilityGrid::uniform(spec);
  EXPECT_DOUBLE_EQ(probability_at(uni, Vec2(4.2, 6.9)), 0.01);
  EXPECT_THROW(probability_at(uni, Vec2(-0.1, 5)), OutOfBounds);
  EXPECT_THROW(probability_at(uni, Vec2(5, 10.5)), OutOfBounds);
}

TEST(Lookup, InterpolateMatchesAtCenters) {
  GridSpec spec(10.0, 10);
  auto g = rasterize_normalize(single(Vec2(4, 6), Mat2::Identity()), spec);
  for (int r = 0; r < 10; r += 3)
    for (int c = 0; c < 10; c += 3) EXPECT_NEAR(interpolate(g, spec.cell_center(r, c)), g.at(r, c), 1e-15);
  EXPECT_EQ(interpolate(g, Vec2(-1, 3)), 0.0);
}

TEST(Rmse, IdentityAndHandValue) {
  GridSpec spec(2.0, 2);
  auto uni = ProbabilityGrid::uniform(spec);
  EXPECT_EQ(grid_rmse(uni, uni), 0.0);
  ProbabilityGrid delta(spec, {1.0, 0.0, 0.0, 0.0});
  const double oracle = std::sqrt((0.75 * 0.75 + 3 * 0.0625) / 4.0);
  EXPECT_NEAR(grid_rmse(uni, delta), oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.4330, 5e-5);
  EXPECT_THROW(grid_rmse(uni, ProbabilityGrid::uniform(GridSpec(2.0, 4))), SpecMismatch);
}

TEST(GridSpecTest, CellGeometry) {
  GridSpec spec(20.0, 80, Vec2(-10, -10));
  EXPECT_DOUBLE_EQ(spec.cell_size(), 0.25);
  EXPECT_TRUE(spec.cell_center(0, 0).isApprox(Vec2(-9.875, -9.875)));
  auto rc = spec.cell_of(Vec2(0.1, -9.9));
  ASSERT_TRUE(rc);
  EXPECT_EQ(rc->first, 0);
  EXPECT_EQ(rc->second, 40);
  EXPECT_FALSE(spec.cell_of(Vec2(10.1, 0)));
  EXPECT_THROW(GridSpec(0.0, 10), std::invalid_argument);
  EXPECT_THROW(GridSpec(10.0, 0), std::invalid_argument);
}
