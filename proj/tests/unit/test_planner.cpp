#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crowdnav/planner.hpp"

using namespace crowdnav;

namespace {

// Smallest positive t with |from + t*u - c| = d, by the quadratic formula.
double ray_disc_oracle(const Vec2& from, const Vec2& u, const Vec2& c, double d) {
  const Vec2 f = from - c;
  const double b = 2 * f.dot(u), cc = f.squaredNorm() - d * d;
  return (-b - std::sqrt(b * b - 4 * cc)) / 2.0;
}

// Independent collision check: every 1 cm along each segment.
bool collision_free(const std::vector<Vec2>& path, const std::vector<Obstacle>& obs, double d_safe) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double len = (path[i + 1] - path[i]).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.01)));
    for (int s = 0; s <= steps; ++s) {
      const Vec2 p = path[i] + (path[i + 1] - path[i]) * (static_cast<double>(s) / steps);
      for (const auto& o : obs)
        if ((p - o.center).norm() < o.radius + d_safe - 1e-9) return false;
    }
  }
  return true;
}

ProbabilityGrid zero_grid(const GridSpec& spec) { return ProbabilityGrid(spec, std::vector<double>(spec.cell_count(), 0.0)); }

}  // namespace

TEST(Cost, DistanceOnlyWhenGridIsZero) {
  GridSpec spec(20.0, 20);
  std::vector<Vec2> wp{Vec2(1, 1), Vec2(2, 1)};
  PlannerParams p;
  EXPECT_NEAR(subpath_cost(wp, Vec2(5, 5), zero_grid(spec), p).value,
              (Vec2(1, 1) - Vec2(5, 5)).norm() + (Vec2(2, 1) - Vec2(5, 5)).norm(), 1e-15);
}

TEST(Cost, ProbabilityTermVanishesAtGoal) {
  GridSpec spec(10.0, 10);
  std::vector<Vec2> wp{Vec2(1, 1), Vec2(2, 2)};
  PlannerParams p;
  EXPECT_NEAR(subpath_cost(wp, Vec2(2, 2), ProbabilityGrid::uniform(spec), p).value, std::sqrt(2.0), 1e-15);
}

TEST(Cost, HandExample) {
  GridSpec spec(10.0, 10, Vec2(-5, -5));
  std::vector<Vec2> wp{Vec2(0, 0), Vec2(1, 0)};
  PlannerParams p;
  p.alpha = 1.0;
  EXPECT_NEAR(subpath_cost(wp, Vec2(2, 0), ProbabilityGrid::uniform(spec), p).value, 3.02, 1e-12);
}

TEST(Cost, OffGridFlagged) {
  GridSpec spec(10.0, 10);
  std::vector<Vec2> wp{Vec2(1, 1), Vec2(-2, 1)};
  auto c = subpath_cost(wp, Vec2(5, 5), ProbabilityGrid::uniform(spec), PlannerParams{});
  EXPECT_TRUE(c.left_grid);
}

TEST(Chord, Collinear) {
  auto lim = obstacle_chord_limit(Vec2(0, 0), Obstacle{Vec2(5, 0), 0.5}, 0.0, 0.5);
  ASSERT_TRUE(lim);
  EXPECT_NEAR(*lim, 4.0, 1e-15);
}

TEST(Chord, PerpendicularMisses) {
  EXPECT_FALSE(obstacle_chord_limit(Vec2(0, 0), Obstacle{Vec2(5, 0), 0.5}, std::numbers::pi / 2, 0.5));
  EXPECT_FALSE(obstacle_chord_limit(Vec2(0, 0), Obstacle{Vec2(5, 0), 0.5}, 2.5, 0.5));
}

TEST(Chord, OffAxisMatchesQuadratic) {
  const double theta = 0.2;
  auto lim = obstacle_chord_limit(Vec2(0, 0), Obstacle{Vec2(5, 0), 0.7}, theta, 0.3);
  ASSERT_TRUE(lim);
  const double oracle = ray_disc_oracle(Vec2(0, 0), Vec2(std::cos(theta), std::sin(theta)), Vec2(5, 0), 1.0);
  EXPECT_NEAR(*lim, oracle, 1e-12);
  EXPECT_NEAR(*lim, 4.78517, 1e-5);
}

TEST(Residuals, StraightPathIsFeasible) {
  std::vector<Vec2> wp{Vec2(1, 1), Vec2(1.5, 1), Vec2(2, 1)};
  auto r = constraint_residuals(wp, Vec2(15, 1), {}, PlannerParams{});
  EXPECT_LE(r.max(), 0.0);
}

TEST(Residuals, ClearanceHandValue) {
  std::vector<Vec2> wp{Vec2(0, 0), Vec2(0.5, 0)};
  std::vector<Obstacle> obs{{Vec2(0.5, 2.0), 1.0}};
  PlannerParams p;
  p.safety_margin = 0.5;
  auto r = constraint_residuals(wp, Vec2(10, 0), obs, p);
  EXPECT_NEAR(r.clearance[1], -0.5, 1e-15);
}

TEST(Residuals, ChordViolation) {
  // 4.9 m segment heading 0.2 rad off an obstacle 5 m away, inflated radius 1.
  const double theta = 0.2;
  std::vector<Vec2> wp{Vec2(0, 0), Vec2(4.9 * std::cos(theta), 4.9 * std::sin(theta))};
  std::vector<Obstacle> obs{{Vec2(5, 0), 0.7}};
  PlannerParams p;
  p.safety_margin = 0.3;
  p.spacing = 5.0;
  p.lookahead = 5.0;
  p.shrink_distance = 1.0;
  auto r = constraint_residuals(wp, Vec2(30, 30), obs, p);
  const double limit = ray_disc_oracle(Vec2(0, 0), Vec2(std::cos(theta), std::sin(theta)), Vec2(5, 0), 1.0);
  EXPECT_NEAR(r.chord[0], 4.9 - limit, 1e-12);
  EXPECT_NEAR(r.chord[0], 0.11483, 1e-5);
}

TEST(Residuals, ShrinkBranchNearGoal) {
  std::vector<Vec2> wp{Vec2(0, 0), Vec2(0.3, 0)};
  PlannerParams p;  // d_I / n = 0.16 once within d_r of the goal
  auto r = constraint_residuals(wp, Vec2(2, 0), {}, p);
  EXPECT_NEAR(r.spacing[0], 0.3 - 0.16, 1e-15);
  EXPECT_NEAR(r.length, 0.3 - 1.7, 1e-15);
}

TEST(Subproblem, EmptyMapGoesStraight) {
  GridSpec spec(20.0, 20);
  PlannerParams p;
  const Vec2 anchor(2, 2), goal(18, 10);
  auto sub = solve_subproblem(anchor, goal, zero_grid(spec), {}, p, 1);
  const Vec2 u = (goal - anchor).normalized();
  for (const auto& w : sub.waypoints) {
    const Vec2 rel = w - anchor;
    EXPECT_LT(std::abs(rel.x() * u.y() - rel.y() * u.x()), 1e-3);
  }
  EXPECT_LE(sub.max_residual, 1e-6);
}

TEST(Subproblem, DetoursAroundBlockingObstacle) {
  GridSpec spec(20.0, 20);
  PlannerParams p;
  std::vector<Obstacle> obs{{Vec2(4.5, 2.0), 0.8}};
  auto sub = solve_subproblem(Vec2(2, 2), Vec2(18, 2), zero_grid(spec), obs, p, 3);
  EXPECT_LE(constraint_residuals(sub.waypoints, Vec2(18, 2), obs, p).max(), 1e-6);
  EXPECT_TRUE(collision_free(sub.waypoints, obs, p.safety_margin));
}

TEST(Subproblem, AvoidsHotBand) {
  GridSpec spec(20.0, 40);
  std::vector<GaussianComponent> band;
  for (int k = 0; k < 9; ++k) band.push_back({Vec2(4.0, 1.0 + 0.5 * k), Mat2::Identity() * 0.15, 1.0 / 9});
  auto fm = rasterize_normalize(MixtureModel(band), spec);
  PlannerParams p;
  p.alpha = 400;
  const Vec2 anchor(2, 3), goal(18, 3);
  auto sub = solve_subproblem(anchor, goal, fm, {}, p, 5);
  std::vector<Vec2> straight;
  for (int k = 0; k < p.waypoints; ++k) straight.push_back(anchor + Vec2(0.8 * k, 0));
  EXPECT_LT(sub.cost, subpath_cost(straight, goal, fm, p).value);
}

TEST(Plan, StartInsideGoalRadius) {
  auto r = plan(Vec2(1, 1), Vec2(1.2, 1.1), zero_grid(GridSpec(10.0, 10)), {}, PlannerParams{}, 1);
  EXPECT_TRUE(r.reached);
  EXPECT_TRUE(r.iterations.empty());
  ASSERT_EQ(r.valid_path.size(), 2u);
  EXPECT_EQ(r.valid_path[1], Vec2(1.2, 1.1));
}

TEST(Plan, EmptyMapNearlyStraight) {
  GridSpec spec(20.0, 20);
  const Vec2 s(1, 1), g(19, 19);
  auto r = plan(s, g, zero_grid(spec), {}, PlannerParams{}, 2);
  ASSERT_TRUE(r.reached) << r.diagnostic;
  EXPECT_LT(polyline_length(r.valid_path), 1.05 * (g - s).norm());
  EXPECT_EQ(r.valid_path.back(), g);
}

TEST(Plan, FeasibleAndDeterministicWithObstacles) {
  GridSpec spec(20.0, 40);
  PlannerParams p;
  std::vector<Obstacle> obs{{Vec2(6, 6), 1.0}, {Vec2(12, 11), 0.7}, {Vec2(15, 16), 0.6}};
  auto a = plan(Vec2(1, 1), Vec2(19, 19), zero_grid(spec), obs, p, 11);
  auto b = plan(Vec2(1, 1), Vec2(19, 19), zero_grid(spec), obs, p, 11);
  ASSERT_TRUE(a.reached) << a.diagnostic;
  EXPECT_TRUE(collision_free(a.valid_path, obs, p.safety_margin));
  ASSERT_EQ(a.valid_path.size(), b.valid_path.size());
  for (std::size_t k = 0; k < a.valid_path.size(); ++k) EXPECT_EQ(a.valid_path[k], b.valid_path[k]);
  for (const auto& it : a.iterations) EXPECT_LE(it.max_residual, 1e-6);
}

TEST(Plan, ShrinksSegmentsNearGoal) {
  GridSpec spec(20.0, 20);
  PlannerParams p;
  const Vec2 g(15, 10);
  auto r = plan(Vec2(2, 10), g, zero_grid(spec), {}, p, 4);
  ASSERT_TRUE(r.reached);
  for (const auto& it : r.iterations) {
    if (it.d_e2g > p.shrink_distance) continue;
    for (std::size_t k = 0; k + 1 < it.waypoints.size(); ++k)
      EXPECT_LE((it.waypoints[k + 1] - it.waypoints[k]).norm(), p.spacing / p.waypoints + p.feasibility_tolerance);
  }
}

TEST(Plan, BendsAroundDensityBlob) {
  GridSpec spec(20.0, 40);
  auto fm = rasterize_normalize(MixtureModel({{Vec2(10, 9), Mat2::Identity() * 2.0, 1.0}}), spec);
  PlannerParams p;
  p.alpha = 400;
  const Vec2 s(2, 10), g(18, 10);
  auto r = plan(s, g, fm, {}, p, 8);
  ASSERT_TRUE(r.reached);
  double along = 0.0, straight = 0.0;
  for (double t = 0; t <= 1.0; t += 0.01) straight += interpolate(fm, s + t * (g - s));
  // Resample the planned path at 101 evenly spaced arc-length points.
  const double total = polyline_length(r.valid_path);
  for (int k = 0; k <= 100; ++k) {
    double want = total * k / 100.0, acc = 0.0;
    for (std::size_t i = 0; i + 1 < r.valid_path.size(); ++i) {
      const double seg = (r.valid_path[i + 1] - r.valid_path[i]).norm();
      if (acc + seg >= want || i + 2 == r.valid_path.size()) {
        const double f = seg > 0 ? std::min(1.0, (want - acc) / seg) : 0.0;
        along += interpolate(fm, r.valid_path[i] + f * (r.valid_path[i + 1] - r.valid_path[i]));
        break;
      }
      acc += seg;
    }
  }
  EXPECT_LT(along, straight);
}

TEST(Params, Validation) {
  PlannerParams p;
  p.lookahead = 10;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_NO_THROW(PlannerParams::with_lookahead(6.0).validate());
}
