#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crowdnav/memory.hpp"

using namespace crowdnav;

namespace {

// Straight-line reference for balance followed by Dempster's rule.
double oracle_fused(double s, double f, double ws) {
  const double wf = 1.0 - ws;
  double c = 2.0 * (ws * s + wf * f) - f;
  double nc = 2.0 * (ws * (1 - s) + wf * (1 - f)) - (1 - f);
  c = c < 0 ? 0 : (c > 1 ? 1 : c);
  nc = nc < 0 ? 0 : (nc > 1 ? 1 : nc);
  const double sum = c + nc;
  c /= sum;
  nc /= sum;
  const double k = s * nc + (1 - s) * c;
  return s * c / (1 - k);
}

}  // namespace

TEST(Bpa, Complement) {
  auto layer = MemoryLayer::full(ProbabilityGrid(GridSpec(2.0, 2), {0.3, 0.1, 0.2, 0.4}), LayerKind::OLM);
  auto m = bpa_from_layer(layer);
  ASSERT_EQ(m.size(), 4u);
  EXPECT_DOUBLE_EQ(m[0].crowded, 0.3);
  EXPECT_DOUBLE_EQ(m[0].not_crowded, 0.7);
  EXPECT_EQ(MassAssignment::from_crowded(0).not_crowded, 1.0);
  EXPECT_EQ(MassAssignment::from_crowded(1).not_crowded, 0.0);
}

TEST(SensorWeight, Values) {
  FusionConfig cfg;
  EXPECT_EQ(sensor_weight(0.0, cfg).first, 1.0);
  EXPECT_EQ(sensor_weight(0.0, cfg).second, 0.0);
  EXPECT_NEAR(sensor_weight(std::log(2.0), cfg).first, 0.75, 1e-15);
  EXPECT_NEAR(sensor_weight(1e6, cfg).first, 0.5, 1e-15);
  EXPECT_GT(sensor_weight(1e6, cfg).first, 0.5);
  EXPECT_THROW(sensor_weight(1.0, FusionConfig{0.0}), std::invalid_argument);
}

TEST(Balance, IdentityWhenSourcesAgree) {
  auto m = MassAssignment::from_crowded(0.37);
  auto [s, f] = balance_masses(m, m, 0.8);
  EXPECT_NEAR(f.crowded, 0.37, 1e-15);
  EXPECT_NEAR(f.not_crowded, 0.63, 1e-15);
}

TEST(Balance, HandValues) {
  auto [s, f] = balance_masses(MassAssignment::from_crowded(0.8), MassAssignment::from_crowded(0.4), 0.7);
  EXPECT_NEAR(f.crowded, 0.96, 1e-12);
  EXPECT_NEAR(f.not_crowded, 0.04, 1e-12);
  EXPECT_DOUBLE_EQ(s.crowded, 0.8);
}

TEST(Balance, ClampedToCertainty) {
  auto [s, f] = balance_masses(MassAssignment::from_crowded(0.9), MassAssignment::from_crowded(0.1), 0.9);
  EXPECT_EQ(f.crowded, 1.0);
  EXPECT_EQ(f.not_crowded, 0.0);
  EXPECT_THROW(balance_masses(s, f, 0.5), std::invalid_argument);
}

TEST(Combine, Values) {
  EXPECT_NEAR(ds_combine({0.5, 0.5}, {0.5, 0.5}).crowded, 0.5, 1e-15);
  EXPECT_EQ(ds_combine({1, 0}, {1, 0}).crowded, 1.0);
  EXPECT_NEAR(ds_combine({0.8, 0.2}, {0.96, 0.04}).crowded, 0.768 / 0.776, 1e-15);
  EXPECT_NEAR(0.768 / 0.776, 0.98969, 5e-6);
  EXPECT_THROW(ds_combine({1, 0}, {0, 1}), VacuousFusion);
}

TEST(Combine, MatchesOracleOnRandomTriples) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0), w(0.5, 1.0);
  for (int k = 0; k < 20000; ++k) {
    const double s = u(rng), f = u(rng);
    double ws = w(rng);
    if (ws == 0.5) ws = 0.75;
    const auto [bs, bf] = balance_masses(MassAssignment::from_crowded(s), MassAssignment::from_crowded(f), ws);
    MassAssignment got;
    try {
      got = ds_combine(bs, bf);
    } catch (const VacuousFusion&) {
      continue;
    }
    ASSERT_NEAR(got.crowded, oracle_fused(s, f, ws), 1e-12);
  }
}

TEST(Fuse, EmptyWorkingMemoryKeepsPrior) {
  GridSpec spec(2.0, 2);
  auto olm = MemoryLayer::full(ProbabilityGrid(spec, {0.1, 0.2, 0.3, 0.4}), LayerKind::OLM);
  auto fm = fuse_layers(MemoryLayer::empty_working(spec), olm, std::nullopt, {});
  EXPECT_EQ(fm.kind, LayerKind::FM);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(fm.values().values()[k], olm.values().values()[k]);
}

TEST(Fuse, PerCellFieldMatchesOracle) {
  GridSpec spec(2.0, 2);
  std::vector<double> v{0.5, 0.2, 0.2, 0.1};
  auto olm = MemoryLayer::full(ProbabilityGrid(spec, v), LayerKind::OLM);
  auto wm = MemoryLayer::working(ProbabilityGrid(spec, v), footprint_all(spec));
  const double ws = sensor_weight(0.3, {}).first;
  auto raw = fuse_cells(wm, olm, 0.3, {});
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(raw[k], oracle_fused(v[k], v[k], ws), 1e-15);
  EXPECT_NEAR(raw[0], 0.5, 1e-15);  // agreeing 0.5 is a fixed point
  auto fm = fuse_layers(wm, olm, 0.3, {});
  EXPECT_NEAR(fm.values().sum(), 1.0, 1e-12);
}

TEST(Fuse, SensorDominatesAnomaly) {
  GridSpec spec(2.0, 2);
  auto olm = MemoryLayer::full(ProbabilityGrid(spec, {0.05, 0.35, 0.3, 0.3}), LayerKind::OLM);
  auto wm = MemoryLayer::working(ProbabilityGrid(spec, {0.9, 0.05, 0.03, 0.02}), footprint_all(spec));
  auto raw = fuse_cells(wm, olm, 0.01, {});
  EXPECT_GT(raw[0], 0.8);
  EXPECT_NEAR(raw[0], oracle_fused(0.9, 0.05, sensor_weight(0.01, {}).first), 1e-15);
}

TEST(Fuse, OutsideFootprintIsPrior) {
  GridSpec spec(2.0, 2);
  auto olm = MemoryLayer::full(ProbabilityGrid(spec, {0.1, 0.2, 0.3, 0.4}), LayerKind::OLM);
  auto wm = MemoryLayer::working(ProbabilityGrid(spec, {0.7, 0.1, 0.1, 0.1}), {1, 0, 0, 0});
  auto raw = fuse_cells(wm, olm, 0.1, {});
  EXPECT_EQ(raw[1], 0.2);
  EXPECT_EQ(raw[2], 0.3);
  EXPECT_EQ(raw[3], 0.4);
}

TEST(Fuse, CertainSensorAgainstCertainPriorStaysFinite) {
  GridSpec spec(2.0, 2);
  auto olm = MemoryLayer::full(ProbabilityGrid(spec, {0.0, 0.5, 0.5, 0.0}), LayerKind::OLM);
  auto wm = MemoryLayer::working(ProbabilityGrid(spec, {1.0, 0.0, 0.0, 0.0}), footprint_all(spec));
  // Balancing drags the prior onto the sensor's side, so no total conflict remains.
  auto raw = fuse_cells(wm, olm, 0.0, {});
  EXPECT_EQ(raw[0], 1.0);
}

TEST(Fuse, SpecMismatchThrows) {
  auto a = MemoryLayer::full(ProbabilityGrid::uniform(GridSpec(2.0, 2)), LayerKind::OLM);
  auto b = MemoryLayer::working(ProbabilityGrid::uniform(GridSpec(2.0, 4)), footprint_all(GridSpec(2.0, 4)));
  EXPECT_THROW(fuse_layers(b, a, 0.1, {}), SpecMismatch);
}

TEST(Footprint, Disc) {
  GridSpec spec(10.0, 10);
  auto fp = footprint_disc(spec, Vec2(5, 5), 1.0);
  int count = 0;
  for (auto v : fp) count += v;
  EXPECT_EQ(count, 4);
}
