#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "crowdnav/gridmap.hpp"
#include "crowdnav/planner.hpp"

namespace crowdnav {

/// 8-connected occupancy graph over a GridSpec, with an optional congestion
/// field on the same spec.
class GridGraph {
 public:
  /// Cells whose center lies within r_j + d_safe of an obstacle are blocked.
  GridGraph(const GridSpec& spec, std::span<const Obstacle> obstacles, double d_safe,
            const ProbabilityGrid* congestion = nullptr);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] bool blocked(int row, int col) const { return blocked_[spec_.index(row, col)] != 0; }
  [[nodiscard]] double congestion(int row, int col) const;
  void set_blocked(int row, int col, bool value) { blocked_[spec_.index(row, col)] = value ? 1 : 0; }

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> blocked_;
  const ProbabilityGrid* congestion_;
};

class NoPath : public std::runtime_error {
 public:
  NoPath() : std::runtime_error("no path") {}
};

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridPath {
  std::vector<Cell> cells;
  double cost = 0.0;          // accumulated edge cost used by the search
  std::vector<Vec2> points;   // start, interior cell centers, goal
};

/// Shortest 8-connected path by edge length, Euclidean heuristic. Throws
/// NoPath when start and goal are disconnected.
GridPath astar(const GridGraph& graph, const Vec2& start, const Vec2& goal);

/// Edge cost = length + lambda * congestion of the destination cell.
GridPath congestion_astar(const GridGraph& graph, const Vec2& start, const Vec2& goal, double lambda);

/// Named congestion presets standing in for the two congestion-aware
/// comparison planners. lambda scales with the cell count so the congestion
/// term is measured against the uniform level 1/N.
enum class CongestionPreset { CG1, CG2 };
double preset_lambda(CongestionPreset preset, const GridSpec& spec);

/// Sum of congestion values over the visited cells.
double summed_congestion(const GridGraph& graph, const GridPath& path);

}  // namespace crowdnav
