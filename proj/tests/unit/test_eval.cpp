#include <gtest/gtest.h>

#include <cmath>

#include "crowdnav/eval.hpp"
#include "crowdnav/pum.hpp"

using namespace crowdnav;
using namespace crowdnav::eval;

TEST(Corridor, Counts) {
  std::vector<Vec2> path{Vec2(0, 0), Vec2(10, 0)};
  EXPECT_EQ(corridor_count(path, {}, 0.5), 0);
  std::vector<Vec2> agents{Vec2(5, 0), Vec2(5, 0.6), Vec2(5, -0.5), Vec2(10.3, 0.3)};
  EXPECT_EQ(corridor_count(path, agents, 0.5), 3);
  std::vector<Vec2> split{Vec2(0, 0), Vec2(3, 0), Vec2(7, 0), Vec2(10, 0)};
  EXPECT_EQ(corridor_count(split, agents, 0.5), 3);
  std::vector<Vec2> one{Vec2(0, 0)};
  EXPECT_THROW(corridor_count(one, agents, 0.5), std::invalid_argument);
}

TEST(Corridor, GridMass) {
  GridSpec spec(10.0, 10);
  std::vector<Vec2> path{Vec2(0, 5.5), Vec2(10, 5.5)};
  EXPECT_NEAR(corridor_mass(path, ProbabilityGrid::uniform(spec), 0.5), 0.1, 1e-12);
}

TEST(TravelTime, Values) {
  std::vector<Vec2> path{Vec2(0, 0), Vec2(10, 0)};
  TravelTimeModel m;
  m.v_max = 1.0;
  EXPECT_DOUBLE_EQ(expected_travel_time(path, 0, m), 10.0);
  // 10 people in a 10 m^2 corridor: density 1, speed halves.
  EXPECT_NEAR(expected_travel_time(path, 10, m), 20.0, 1e-12);
  m.beta = 0.0;
  EXPECT_DOUBLE_EQ(expected_travel_time(path, 50, m), 10.0);
  m.beta = 0.7;
  double prev = 0;
  for (int c = 0; c < 30; ++c) {
    const double t = expected_travel_time(path, c, m);
    EXPECT_GE(t, prev);
    prev = t;
  }
  EXPECT_THROW(expected_travel_time(path, -1, m), std::invalid_argument);
}

TEST(Improvement, Values) {
  EXPECT_EQ(improvement_index(50, 50), 0.0);
  EXPECT_NEAR(improvement_index(100, 80), 0.2, 1e-15);
  EXPECT_NEAR(improvement_index(212.22, 111.59), 0.4741, 1e-4);
  EXPECT_LT(improvement_index(10, 12), 0.0);
  EXPECT_THROW(improvement_index(0, 1), std::invalid_argument);
}

TEST(Rmse, Series) {
  GridSpec spec(2.0, 2);
  std::vector<TimedGrid> a{{0.0, ProbabilityGrid(spec, {0.1, 0.2, 0.3, 0.4})},
                           {1.0, ProbabilityGrid(spec, {0.4, 0.3, 0.2, 0.1})}};
  auto same = rmse_series(a, a);
  EXPECT_EQ(same.values, (std::vector<double>{0.0, 0.0}));
  std::vector<TimedGrid> shifted{{0.0, ProbabilityGrid(spec, {0.2, 0.3, 0.4, 0.5})},
                                 {1.0, ProbabilityGrid(spec, {0.5, 0.4, 0.3, 0.2})}};
  auto off = rmse_series(a, shifted);
  EXPECT_NEAR(off.values[0], 0.1, 1e-12);
  EXPECT_NEAR(off.values[1], 0.1, 1e-12);
  EXPECT_NEAR(off.average, 0.1, 1e-12);
  shifted[1].first = 2.0;
  EXPECT_THROW(rmse_series(a, shifted), std::invalid_argument);
}

TEST(Pum, FadesBackToPrior) {
  GridSpec spec(2.0, 2);
  ProbabilityGrid prior(spec, {0.25, 0.25, 0.25, 0.25});
  ProbabilityGrid seen(spec, {0.7, 0.1, 0.1, 0.1});
  PumModel pum(40.0);
  EXPECT_EQ(pum.estimate(0.0, prior).values()[0], 0.25);
  pum.observe(10.0, seen, prior);
  auto now = pum.estimate(10.0, prior);
  EXPECT_NEAR(now.values()[0], 0.7 / 1.45, 1e-12);
  auto half = pum.estimate(30.0, prior);
  EXPECT_NEAR(half.values()[0], (0.25 + 0.225) / 1.225, 1e-12);
  EXPECT_NEAR(pum.decay(30.0), 0.5, 1e-15);
  EXPECT_EQ(pum.estimate(60.0, prior).values()[0], 0.25);
  EXPECT_THROW(PumModel(0.0), std::invalid_argument);
}
