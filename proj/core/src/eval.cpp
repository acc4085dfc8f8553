#include "crowdnav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crowdnav/planner.hpp"

namespace crowdnav::eval {

namespace {

void require_path(std::span<const Vec2> path) {
  if (path.size() < 2) throw std::invalid_argument("degenerate path: need at least 2 points");
}

}  // namespace

double distance_to_polyline(std::span<const Vec2> path, const Vec2& point) {
  require_path(path);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec2 d = path[i + 1] - path[i];
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((point - path[i]).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (point - (path[i] + t * d)).norm());
  }
  return best;
}

int corridor_count(std::span<const Vec2> path, std::span<const Vec2> agents, double half_width) {
  require_path(path);
  int count = 0;
  for (const auto& a : agents) {
    if (distance_to_polyline(path, a) <= half_width) ++count;
  }
  return count;
}

double corridor_mass(std::span<const Vec2> path, const ProbabilityGrid& grid, double half_width) {
  require_path(path);
  const GridSpec& spec = grid.spec();
  double mass = 0.0;
  for (int row = 0; row < spec.resolution; ++row) {
    for (int col = 0; col < spec.resolution; ++col) {
      if (distance_to_polyline(path, spec.cell_center(row, col)) <= half_width) mass += grid.at(row, col);
    }
  }
  return mass;
}

double expected_travel_time(std::span<const Vec2> path, double count, const TravelTimeModel& model) {
  require_path(path);
  model.validate();
  if (!(count >= 0.0)) throw std::invalid_argument("expected_travel_time: count must be >= 0");
  const double length = polyline_length(path);
  if (length == 0.0) return 0.0;
  const double density = count / (length * 2.0 * model.half_width);
  return length / (model.v_max * std::exp(-model.beta * density));
}

double travel_time_through(std::span<const Vec2> path, std::span<const Vec2> agents,
                           const TravelTimeModel& model) {
  return expected_travel_time(path, corridor_count(path, agents, model.half_width), model);
}

double improvement_index(double t_bench, double t_rho) {
  if (!(t_bench > 0.0)) throw std::invalid_argument("improvement_index: benchmark time must be > 0");
  return (t_bench - t_rho) / t_bench;
}

RmseSeries rmse_series(std::span<const TimedGrid> estimates, std::span<const TimedGrid> truths) {
  if (estimates.size() != truths.size()) throw std::invalid_argument("rmse_series: series lengths differ");
  RmseSeries out;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (estimates[k].first != truths[k].first) throw std::invalid_argument("rmse_series: misaligned timestamps");
    out.values.push_back(grid_rmse(estimates[k].second, truths[k].second));
  }
  if (!out.values.empty()) {
    double total = 0.0;
    for (double v : out.values) total += v;
    out.average = total / static_cast<double>(out.values.size());
  }
  return out;
}

}  // namespace crowdnav::eval
