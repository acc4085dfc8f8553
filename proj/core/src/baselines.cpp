#include "crowdnav/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

namespace crowdnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Cell locate(const GridGraph& graph, const Vec2& p) {
  const auto c = graph.spec().cell_of(p);
  if (!c) throw std::invalid_argument("astar: endpoint outside the grid");
  return {c->first, c->second};
}

GridPath search(const GridGraph& graph, const Vec2& start_pt, const Vec2& goal_pt, double lambda) {
  const GridSpec& spec = graph.spec();
  const Cell start = locate(graph, start_pt);
  const Cell goal = locate(graph, goal_pt);
  if (graph.blocked(start.row, start.col) || graph.blocked(goal.row, goal.col)) {
    throw std::invalid_argument("astar: start or goal cell is blocked");
  }

  const int n = spec.resolution;
  const double h = spec.cell_size();
  const std::size_t count = spec.cell_count();
  std::vector<double> g(count, kInf);
  std::vector<std::int64_t> parent(count, -1);

  auto heuristic = [&](int r, int c) { return h * std::hypot(r - goal.row, c - goal.col); };

  // (f, g, row, col): ties on f resolve to the lower g, then the lower cell.
  using Entry = std::tuple<double, double, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t goal_idx = spec.index(goal.row, goal.col);
  g[spec.index(start.row, start.col)] = 0.0;
  open.emplace(heuristic(start.row, start.col), 0.0, start.row, start.col);

  constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  while (!open.empty()) {
    const auto [f, g_entry, r, c] = open.top();
    // The heuristic is admissible only up to rounding, so popping the goal is
    // not enough: keep going until nothing on the queue could still undercut
    // it. Improved nodes are simply re-queued.
    if (g[goal_idx] < kInf && f > g[goal_idx] + 1e-9 * (1.0 + g[goal_idx])) break;
    open.pop();
    const std::size_t idx = spec.index(r, c);
    if (g_entry > g[idx] || idx == goal_idx) continue;
    for (int k = 0; k < 8; ++k) {
      const int nr = r + kDr[k];
      const int nc = c + kDc[k];
      if (nr < 0 || nc < 0 || nr >= n || nc >= n || graph.blocked(nr, nc)) continue;
      const std::size_t nidx = spec.index(nr, nc);
      const double step = (kDr[k] != 0 && kDc[k] != 0) ? h * std::numbers::sqrt2 : h;
      const double cand = g[idx] + step + (lambda != 0.0 ? lambda * graph.congestion(nr, nc) : 0.0);
      if (cand < g[nidx]) {
        g[nidx] = cand;
        parent[nidx] = static_cast<std::int64_t>(idx);
        open.emplace(cand + heuristic(nr, nc), cand, nr, nc);
      }
    }
  }
  const bool found = g[goal_idx] < kInf;
  if (!found) throw NoPath();

  GridPath path;
  path.cost = g[spec.index(goal.row, goal.col)];
  for (auto idx = static_cast<std::int64_t>(spec.index(goal.row, goal.col)); idx >= 0;
       idx = parent[static_cast<std::size_t>(idx)]) {
    path.cells.push_back({static_cast<int>(idx / n), static_cast<int>(idx % n)});
  }
  std::reverse(path.cells.begin(), path.cells.end());

  path.points.push_back(start_pt);
  for (std::size_t k = 1; k + 1 < path.cells.size(); ++k) {
    path.points.push_back(spec.cell_center(path.cells[k].row, path.cells[k].col));
  }
  path.points.push_back(goal_pt);
  return path;
}

}  // namespace

GridGraph::GridGraph(const GridSpec& spec, std::span<const Obstacle> obstacles, double d_safe,
                     const ProbabilityGrid* congestion)
    : spec_(spec), blocked_(spec.cell_count(), 0), congestion_(congestion) {
  if (congestion_ && !(congestion_->spec() == spec_)) throw SpecMismatch();
  for (int row = 0; row < spec_.resolution; ++row) {
    for (int col = 0; col < spec_.resolution; ++col) {
      const Vec2 p = spec_.cell_center(row, col);
      for (const auto& o : obstacles) {
        if ((p - o.center).norm() <= o.radius + d_safe) {
          blocked_[spec_.index(row, col)] = 1;
          break;
        }
      }
    }
  }
}

double GridGraph::congestion(int row, int col) const { return congestion_ ? congestion_->at(row, col) : 0.0; }

GridPath astar(const GridGraph& graph, const Vec2& start, const Vec2& goal) {
  return search(graph, start, goal, 0.0);
}

GridPath congestion_astar(const GridGraph& graph, const Vec2& start, const Vec2& goal, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("congestion weight must be >= 0");
  return search(graph, start, goal, lambda);
}

double preset_lambda(CongestionPreset preset, const GridSpec& spec) {
  const double per_uniform = static_cast<double>(spec.cell_count()) * spec.cell_size();
  switch (preset) {
    case CongestionPreset::CG1: return 0.5 * per_uniform;
    case CongestionPreset::CG2: return 2.0 * per_uniform;
  }
  return 0.0;
}

double summed_congestion(const GridGraph& graph, const GridPath& path) {
  double total = 0.0;
  for (const auto& c : path.cells) total += graph.congestion(c.row, c.col);
  return total;
}

}  // namespace crowdnav
