#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/gridmap.hpp"

namespace crowdnav {

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.5;
};

/// Axis-aligned workspace box the waypoints must stay in.
struct Bounds {
  Vec2 lower = Vec2::Zero();
  Vec2 upper = Vec2::Zero();
};

struct PlannerParams {
  int waypoints = 5;             // n, waypoints per sub-path including the anchor
  double spacing = 0.8;          // d_I, max distance between consecutive waypoints
  double lookahead = 4.0;        // d_l, max sub-path length
  double shrink_distance = 4.0;  // d_r, end-to-goal distance below which the limits shrink
  double goal_radius = 0.5;      // d_s
  double safety_margin = 0.3;    // d_safe
  double alpha = 50.0;           // probability-cost weight, 1/m
  int restarts = 6;

  // Penalty local search.
  double penalty_start = 10.0;
  double penalty_growth = 10.0;
  int penalty_rounds = 6;
  int max_iterations = 200;
  double tolerance = 1e-10;
  double feasibility_tolerance = 1e-6;
  /// Constraints are tightened by this much during descent so that the
  /// penalty solution lands strictly inside the true feasible set.
  double constraint_margin = 1e-4;

  std::optional<Bounds> bounds;

  /// Defaults with d_I = d_l / n and d_r = d_l.
  static PlannerParams with_lookahead(double lookahead, int waypoints = 5);
  void validate() const;
};

struct SubPath {
  std::vector<Vec2> waypoints;
  double cost = 0.0;
  double d_e2g = 0.0;
  double max_residual = 0.0;
  bool left_grid = false;  // some waypoint fell outside the memory grid
};

struct PathResult {
  std::vector<Vec2> valid_path;
  std::vector<SubPath> iterations;
  bool reached = false;
  std::string diagnostic;
};

class SubproblemInfeasible : public std::runtime_error {
 public:
  SubproblemInfeasible() : std::runtime_error("sub-problem infeasible") {}
};

struct CostBreakdown {
  double value = 0.0;
  bool left_grid = false;
};

/// Sum of waypoint-to-goal distances plus the end-distance-scaled sum of cell
/// probabilities. Waypoints outside the grid contribute zero probability and
/// set `left_grid`.
CostBreakdown subpath_cost(std::span<const Vec2> waypoints, const Vec2& goal, const ProbabilityGrid& fm,
                           const PlannerParams& params);

/// Distance along a ray from `from` (heading `theta` measured from the
/// direction to the obstacle) to the first point of the disc of radius
/// r + d_safe. nullopt when the ray misses the disc; 0 when `from` is inside.
std::optional<double> obstacle_chord_limit(const Vec2& from, const Obstacle& obstacle, double theta,
                                           double d_safe);

/// Smallest chord limit over all obstacles for the segment a -> b.
std::optional<double> nearest_chord_limit(const Vec2& a, const Vec2& b, std::span<const Obstacle> obstacles,
                                          double d_safe, double extra_margin = 0.0);

/// All residuals are <= 0 when the constraint holds.
struct Residuals {
  std::vector<double> spacing;    // per segment
  double length = 0.0;            // sub-path length vs its limit
  std::vector<double> clearance;  // per (waypoint, obstacle)
  std::vector<double> chord;      // per segment, vs nearest blocking obstacle
  std::vector<double> bounds;     // per waypoint and side, when bounds are set

  [[nodiscard]] double max() const;
};

Residuals constraint_residuals(std::span<const Vec2> waypoints, const Vec2& goal,
                               std::span<const Obstacle> obstacles, const PlannerParams& params);

/// Optimizes one sub-path anchored at `anchor`. Throws SubproblemInfeasible
/// when no restart reaches a feasible point.
SubPath solve_subproblem(const Vec2& anchor, const Vec2& goal, const ProbabilityGrid& fm,
                         std::span<const Obstacle> obstacles, const PlannerParams& params,
                         std::uint64_t rng_seed);

/// Receding-horizon loop: commit the second node of each solved sub-path
/// until the sub-path end is within the goal radius.
PathResult plan(const Vec2& start, const Vec2& goal, const ProbabilityGrid& fm,
                std::span<const Obstacle> obstacles, const PlannerParams& params, std::uint64_t rng_seed);

double polyline_length(std::span<const Vec2> path);

}  // namespace crowdnav
