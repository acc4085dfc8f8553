#include "crowdnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace crowdnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Ray/disc first-hit distance in projection form: `along` is the component of
// (center - from) on the heading, `perp_sq` the squared perpendicular offset.
std::optional<double> first_hit(double along, double perp_sq, double inflated) {
  if (along <= 0.0) return std::nullopt;
  const double r2 = inflated * inflated;
  if (perp_sq > r2) return std::nullopt;
  return along - std::sqrt(r2 - perp_sq);
}

// Minimum first-hit distance over obstacles for the ray from a towards b,
// skipping discs that already contain a.
std::optional<double> chord_limit_impl(const Vec2& a, const Vec2& b, std::span<const Obstacle> obstacles,
                                       double inflate) {
  const Vec2 seg = b - a;
  const double len = seg.norm();
  if (len == 0.0) return std::nullopt;
  const Vec2 u = seg / len;
  std::optional<double> best;
  for (const auto& o : obstacles) {
    const Vec2 rel = o.center - a;
    const double dist_sq = rel.squaredNorm();
    const double radius = o.radius + inflate;
    if (dist_sq < radius * radius) continue;
    const double along = u.dot(rel);
    const auto hit = first_hit(along, std::max(0.0, dist_sq - along * along), radius);
    if (hit && (!best || *hit < *best)) best = hit;
  }
  return best;
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * d)).norm();
}

struct Layout {
  double spacing_limit;
  double length_limit;
  double d_e2g;
};

Layout layout_for(std::span<const Vec2> wp, const Vec2& goal, const PlannerParams& p) {
  const double d = (wp.back() - goal).norm();
  const bool far = d > p.shrink_distance;
  return {far ? p.spacing : p.spacing / p.waypoints, far ? p.lookahead : d, d};
}

// The limits switch when wp_n crosses the shrink distance. Descent runs with
// the branch held fixed plus a constraint keeping wp_n on that side.
enum class Branch { Far, Near };

Layout branch_layout(std::span<const Vec2> wp, const Vec2& goal, const PlannerParams& p, Branch b) {
  const double d = (wp.back() - goal).norm();
  if (b == Branch::Far) return {p.spacing, p.lookahead, d};
  return {p.spacing / p.waypoints, d, d};
}

// Penalized objective over the free waypoints wp_2..wp_n.
class PenaltyProblem {
 public:
  PenaltyProblem(const Vec2& anchor, const Vec2& goal, const ProbabilityGrid& fm,
                 std::vector<Obstacle> obstacles, const PlannerParams& params)
      : anchor_(anchor), goal_(goal), fm_(fm), obstacles_(std::move(obstacles)), p_(params),
        wp_(static_cast<std::size_t>(params.waypoints)) {
    wp_[0] = anchor_;
  }

  void set_penalty(double mu) { mu_ = mu; }
  void set_branch(Branch b) { branch_ = b; }
  [[nodiscard]] int dimension() const { return 2 * (p_.waypoints - 1); }

  const std::vector<Vec2>& unpack(const Eigen::VectorXd& x) const {
    for (int k = 1; k < p_.waypoints; ++k) wp_[static_cast<std::size_t>(k)] = Vec2(x[2 * k - 2], x[2 * k - 1]);
    return wp_;
  }

  double operator()(const Eigen::VectorXd& x) const {
    const auto& wp = unpack(x);
    const double m = p_.constraint_margin;
    double dist_sum = 0.0;
    double prob_sum = 0.0;
    for (const auto& w : wp) {
      dist_sum += (w - goal_).norm();
      prob_sum += interpolate(fm_, w);
    }
    const Layout lay = branch_layout(wp, goal_, p_, branch_);
    const double cost = dist_sum + p_.alpha * lay.d_e2g * prob_sum;

    double pen = 0.0;
    auto add = [&pen](double r) {
      if (r > 0.0) pen += r * r;
    };
    if (branch_ == Branch::Far) {
      add(p_.shrink_distance + m - lay.d_e2g);
    } else {
      add(lay.d_e2g - p_.shrink_distance + m);
    }
    double length = 0.0;
    for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
      const double seg = (wp[i + 1] - wp[i]).norm();
      length += seg;
      add(seg - lay.spacing_limit + m);
      // Continuous stand-in for the chord limit: with both ends outside a
      // disc, "segment stays clear of the disc" is the same set as "segment
      // no longer than the first hit", but without the jump at tangency.
      for (const auto& o : obstacles_) {
        add(o.radius + p_.safety_margin + m - segment_distance(wp[i], wp[i + 1], o.center));
      }
    }
    add(length - lay.length_limit + m);
    for (std::size_t i = 1; i < wp.size(); ++i) {
      for (const auto& o : obstacles_) {
        add(o.radius + p_.safety_margin + m - (wp[i] - o.center).norm());
      }
      if (p_.bounds) {
        add(p_.bounds->lower.x() + m - wp[i].x());
        add(p_.bounds->lower.y() + m - wp[i].y());
        add(wp[i].x() - p_.bounds->upper.x() + m);
        add(wp[i].y() - p_.bounds->upper.y() + m);
      }
    }
    return cost + mu_ * pen;
  }

 private:
  Vec2 anchor_;
  Vec2 goal_;
  const ProbabilityGrid& fm_;
  std::vector<Obstacle> obstacles_;
  const PlannerParams& p_;
  double mu_ = 1.0;
  Branch branch_ = Branch::Far;
  mutable std::vector<Vec2> wp_;
};

Eigen::VectorXd numeric_gradient(const PenaltyProblem& f, Eigen::VectorXd x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double h = 1e-6 * std::max(1.0, std::abs(xi));
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Quasi-Newton descent with Armijo backtracking; returns the final iterate.
Eigen::VectorXd bfgs_minimize(const PenaltyProblem& f, Eigen::VectorXd x, int max_iterations, double tol) {
  const auto n = x.size();
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  double fx = f(x);
  Eigen::VectorXd g = numeric_gradient(f, x);
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < tol) break;
    Eigen::VectorXd dir = -h_inv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new);
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (h_inv.isIdentity()) break;
      h_inv.setIdentity();
      continue;
    }
    const Eigen::VectorXd g_new = numeric_gradient(f, x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const bool converged = std::abs(fx - f_new) <= tol * std::max(1.0, std::abs(fx)) && s.norm() < 1e-9;
    x = x_new;
    fx = f_new;
    g = g_new;
    if (converged) break;
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h_inv = (eye - rho * s * y.transpose()) * h_inv * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  return x;
}

Eigen::VectorXd pack(std::span<const Vec2> wp) {
  Eigen::VectorXd x(2 * static_cast<Eigen::Index>(wp.size() - 1));
  for (std::size_t k = 1; k < wp.size(); ++k) {
    x[2 * static_cast<Eigen::Index>(k) - 2] = wp[k].x();
    x[2 * static_cast<Eigen::Index>(k) - 1] = wp[k].y();
  }
  return x;
}

std::vector<Vec2> straight_seed(const Vec2& anchor, const Vec2& goal, const PlannerParams& p) {
  const double d = (goal - anchor).norm();
  const Vec2 u = d > 0.0 ? Vec2((goal - anchor) / d) : Vec2(1.0, 0.0);
  const double step = std::min(p.spacing, d / std::max(1, p.waypoints - 1)) * 0.5;
  std::vector<Vec2> wp;
  for (int k = 0; k < p.waypoints; ++k) wp.push_back(anchor + u * (step * k));
  return wp;
}

// Random walk inside the look-ahead disc: random initial heading, bounded
// turning, steps shorter than the spacing limit.
std::vector<Vec2> random_seed(const Vec2& anchor, const PlannerParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> turn(-0.6, 0.6);
  std::uniform_real_distribution<double> frac(0.3, 0.9);
  const double max_step = std::min(p.spacing, p.lookahead / std::max(1, p.waypoints - 1));
  std::vector<Vec2> wp{anchor};
  double heading = angle(rng);
  for (int k = 1; k < p.waypoints; ++k) {
    heading += turn(rng);
    const double len = frac(rng) * max_step;
    wp.push_back(wp.back() + len * Vec2(std::cos(heading), std::sin(heading)));
  }
  return wp;
}

}  // namespace

PlannerParams PlannerParams::with_lookahead(double lookahead, int waypoints) {
  PlannerParams p;
  p.waypoints = waypoints;
  p.lookahead = lookahead;
  p.spacing = lookahead / waypoints;
  p.shrink_distance = lookahead;
  return p;
}

void PlannerParams::validate() const {
  if (waypoints < 2) throw std::invalid_argument("planner needs at least 2 waypoints");
  for (double v : {spacing, lookahead, shrink_distance, goal_radius, safety_margin, alpha}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("planner distances and alpha must be > 0");
  }
  if (lookahead > waypoints * spacing + 1e-12) {
    throw std::invalid_argument("look-ahead distance must not exceed n * d_I");
  }
  if (restarts < 1 || penalty_rounds < 1 || max_iterations < 1) {
    throw std::invalid_argument("planner restarts, penalty rounds and iterations must be >= 1");
  }
  if (!(penalty_start > 0.0) || !(penalty_growth > 1.0)) {
    throw std::invalid_argument("penalty schedule must start > 0 and grow by > 1");
  }
  if (!(constraint_margin >= 0.0)) throw std::invalid_argument("constraint margin must be >= 0");
}

CostBreakdown subpath_cost(std::span<const Vec2> waypoints, const Vec2& goal, const ProbabilityGrid& fm,
                           const PlannerParams& params) {
  if (waypoints.empty()) throw std::invalid_argument("subpath_cost: empty sub-path");
  CostBreakdown out;
  double dist_sum = 0.0;
  double prob_sum = 0.0;
  for (const auto& w : waypoints) {
    dist_sum += (w - goal).norm();
    if (const auto cell = fm.spec().cell_of(w)) {
      prob_sum += fm.at(cell->first, cell->second);
    } else {
      out.left_grid = true;
    }
  }
  const double d_e2g = (waypoints.back() - goal).norm();
  out.value = dist_sum + params.alpha * d_e2g * prob_sum;
  return out;
}

std::optional<double> obstacle_chord_limit(const Vec2& from, const Obstacle& obstacle, double theta,
                                           double d_safe) {
  const double a = (from - obstacle.center).norm();
  const double d_j = obstacle.radius + d_safe;
  if (a < d_j) return 0.0;
  const double along = a * std::cos(theta);
  const double perp = a * std::sin(theta);
  return first_hit(along, perp * perp, d_j);
}

std::optional<double> nearest_chord_limit(const Vec2& a, const Vec2& b, std::span<const Obstacle> obstacles,
                                          double d_safe, double extra_margin) {
  return chord_limit_impl(a, b, obstacles, d_safe + extra_margin);
}

double Residuals::max() const {
  double m = length;
  for (const auto* group : {&spacing, &clearance, &chord, &bounds}) {
    for (double r : *group) m = std::max(m, r);
  }
  return m;
}

Residuals constraint_residuals(std::span<const Vec2> wp, const Vec2& goal, std::span<const Obstacle> obstacles,
                               const PlannerParams& params) {
  if (wp.size() < 2) throw std::invalid_argument("constraint_residuals: sub-path needs >= 2 waypoints");
  const Layout lay = layout_for(wp, goal, params);
  Residuals r;
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const double seg = (wp[i + 1] - wp[i]).norm();
    length += seg;
    r.spacing.push_back(seg - lay.spacing_limit);
    const auto lim = chord_limit_impl(wp[i], wp[i + 1], obstacles, params.safety_margin);
    r.chord.push_back(lim ? seg - *lim : -kInf);
  }
  r.length = length - lay.length_limit;
  for (const auto& w : wp) {
    for (const auto& o : obstacles) {
      r.clearance.push_back(o.radius + params.safety_margin - (w - o.center).norm());
    }
    if (params.bounds) {
      r.bounds.push_back(params.bounds->lower.x() - w.x());
      r.bounds.push_back(params.bounds->lower.y() - w.y());
      r.bounds.push_back(w.x() - params.bounds->upper.x());
      r.bounds.push_back(w.y() - params.bounds->upper.y());
    }
  }
  return r;
}

SubPath solve_subproblem(const Vec2& anchor, const Vec2& goal, const ProbabilityGrid& fm,
                         std::span<const Obstacle> obstacles, const PlannerParams& params,
                         std::uint64_t rng_seed) {
  params.validate();
  for (const auto& o : obstacles) {
    if ((anchor - o.center).norm() < o.radius + params.safety_margin) {
      throw std::invalid_argument("solve_subproblem: anchor violates obstacle clearance");
    }
  }

  // Waypoints cannot leave the look-ahead disc by much, so distant obstacles
  // are dropped from the descent. Acceptance re-checks against all of them.
  std::vector<Obstacle> nearby;
  const double scope = params.lookahead + params.spacing + params.safety_margin;
  for (const auto& o : obstacles) {
    if ((o.center - anchor).norm() - o.radius <= scope) nearby.push_back(o);
  }
  PenaltyProblem problem(anchor, goal, fm, std::move(nearby), params);

  // The near branch is only reachable when wp_n can get within d_r; the far
  // branch only when it can stay beyond d_r.
  const double anchor_gap = (anchor - goal).norm();
  const double reach = params.lookahead;
  std::vector<Branch> branches;
  if (anchor_gap + reach > params.shrink_distance) branches.push_back(Branch::Far);
  if (anchor_gap - reach < params.shrink_distance) branches.push_back(Branch::Near);

  std::mt19937_64 rng(splitmix64(rng_seed));
  std::optional<SubPath> best;
  for (int restart = 0; restart < params.restarts; ++restart) {
    const auto seed_path = restart == 0 ? straight_seed(anchor, goal, params) : random_seed(anchor, params, rng);
    for (const Branch branch : branches) {
    problem.set_branch(branch);
    Eigen::VectorXd x = pack(seed_path);
    double mu = params.penalty_start;
    std::vector<Vec2> wp;
    bool feasible = false;
    for (int round = 0; round < params.penalty_rounds; ++round, mu *= params.penalty_growth) {
      problem.set_penalty(mu);
      x = bfgs_minimize(problem, x, params.max_iterations, params.tolerance);
      wp = problem.unpack(x);
      if (constraint_residuals(wp, goal, obstacles, params).max() <= params.feasibility_tolerance) {
        feasible = true;
        break;
      }
    }
    if (!feasible) continue;

    SubPath candidate;
    candidate.waypoints = wp;
    const auto cost = subpath_cost(wp, goal, fm, params);
    candidate.cost = cost.value;
    candidate.left_grid = cost.left_grid;
    candidate.d_e2g = (wp.back() - goal).norm();
    candidate.max_residual = constraint_residuals(wp, goal, obstacles, params).max();
    if (!best || candidate.cost < best->cost) best = std::move(candidate);
    }
  }
  if (!best) throw SubproblemInfeasible();
  return *best;
}

PathResult plan(const Vec2& start, const Vec2& goal, const ProbabilityGrid& fm,
                std::span<const Obstacle> obstacles, const PlannerParams& params, std::uint64_t rng_seed) {
  params.validate();
  if (!start.allFinite() || !goal.allFinite()) throw std::invalid_argument("plan: start and goal must be finite");
  for (const auto& o : obstacles) {
    const double d_j = o.radius + params.safety_margin;
    if ((start - o.center).norm() < d_j || (goal - o.center).norm() < d_j) {
      throw std::invalid_argument("plan: start or goal violates obstacle clearance");
    }
  }

  PathResult result;
  result.valid_path.push_back(start);
  if ((start - goal).norm() <= params.goal_radius) {
    result.valid_path.push_back(goal);
    result.reached = true;
    return result;
  }

  const int cap = static_cast<int>(std::ceil(4.0 * (start - goal).norm() / params.spacing));
  Vec2 anchor = start;
  for (int c = 0; c < cap; ++c) {
    SubPath sub;
    try {
      sub = solve_subproblem(anchor, goal, fm, obstacles, params, rng_seed ^ splitmix64(static_cast<std::uint64_t>(c)));
    } catch (const SubproblemInfeasible& e) {
      result.diagnostic = std::string(e.what()) + " at iteration " + std::to_string(c + 1);
      return result;
    }
    result.iterations.push_back(sub);
    result.valid_path.push_back(sub.waypoints[1]);
    anchor = sub.waypoints[1];

    if (sub.d_e2g <= params.goal_radius) {
      // Close out along the remaining nodes of the last sub-path, then the goal,
      // provided the final connector is itself clear.
      const Vec2& end = sub.waypoints.back();
      const auto lim = chord_limit_impl(end, goal, obstacles, params.safety_margin);
      if (!lim || *lim >= (goal - end).norm()) {
        for (std::size_t k = 2; k < sub.waypoints.size(); ++k) result.valid_path.push_back(sub.waypoints[k]);
        result.valid_path.push_back(goal);
        result.reached = true;
        return result;
      }
    }
  }
  result.diagnostic = "iteration cap reached";
  return result;
}

double polyline_length(std::span<const Vec2> path) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) total += (path[i + 1] - path[i]).norm();
  return total;
}

}  // namespace crowdnav
