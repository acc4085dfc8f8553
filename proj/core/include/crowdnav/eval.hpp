#pragma once

#include <span>
#include <utility>
#include <vector>

#include "crowdnav/gridmap.hpp"
#include "crowdnav/scenario.hpp"

namespace crowdnav::eval {

/// Smallest distance from `point` to the polyline.
double distance_to_polyline(std::span<const Vec2> path, const Vec2& point);

/// Pedestrians within `half_width` of the path (inclusive).
int corridor_count(std::span<const Vec2> path, std::span<const Vec2> agents, double half_width);

/// Grid mass whose cell centers lie within `half_width` of the path.
double corridor_mass(std::span<const Vec2> path, const ProbabilityGrid& grid, double half_width);

/// length / (v_max * exp(-beta * rho)), rho = count / (length * 2 * half_width).
double expected_travel_time(std::span<const Vec2> path, double count, const TravelTimeModel& model);

/// Convenience: corridor count on `agents` followed by expected_travel_time.
double travel_time_through(std::span<const Vec2> path, std::span<const Vec2> agents,
                           const TravelTimeModel& model);

/// Relative time saved against a benchmark: (t_bench - t_rho) / t_bench.
double improvement_index(double t_bench, double t_rho);

using TimedGrid = std::pair<double, ProbabilityGrid>;

struct RmseSeries {
  std::vector<double> values;
  double average = 0.0;
};

RmseSeries rmse_series(std::span<const TimedGrid> estimates, std::span<const TimedGrid> truths);

}  // namespace crowdnav::eval
