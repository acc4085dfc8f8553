#include "crowdnav_cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "crowdnav/baselines.hpp"
#include "crowdnav/eval.hpp"
#include "crowdnav/planner.hpp"

namespace crowdnav::app {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

long to_steps(double seconds, double dt) { return static_cast<long>(std::llround(seconds / dt)); }

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

MethodOutcome score_path(std::string name, const std::vector<Vec2>& path, bool reached,
                         const std::vector<Vec2>& agents, const TravelTimeModel& model) {
  MethodOutcome out;
  out.method = std::move(name);
  out.reached = reached;
  out.length = polyline_length(path);
  out.corridor_count = eval::corridor_count(path, agents, model.half_width);
  out.travel_time = eval::expected_travel_time(path, out.corridor_count, model);
  return out;
}

// A* path through free cells; the fallback when the optimizer gives up.
GridPath grid_path(const GridGraph& graph, const Vec2& s, const Vec2& g, double lambda) {
  return lambda == 0.0 ? astar(graph, s, g) : congestion_astar(graph, s, g, lambda);
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix(master * 0x100000001b3ULL + splitmix(index + 1));
}

Case1Run run_case1(const ScenarioConfig& cfg, const OlmBank& olm, std::uint64_t seed) {
  const double warmup = cfg.experiment_value("warmup", 60.0);
  const double span = cfg.experiment_value("eval_duration", 80.0);
  const double every = cfg.experiment_value("eval_step", 1.0);
  const long first = to_steps(warmup, cfg.dt);
  const long last = to_steps(warmup + span, cfg.dt);
  const long eval_every = std::max(1L, to_steps(every, cfg.dt));
  const int scan = scan_interval(cfg);

  Case1Run run;
  run.seed = seed;
  auto world = sim::initial_state(cfg, seed);
  MemoryPipeline memory(cfg, olm, splitmix(seed ^ 0x5e5e5e5eULL));
  double track_total = 0.0;
  for (long k = 1; k <= last; ++k) {
    world = sim::step(std::move(world), cfg, cfg.dt);
    if (k % scan == 0) memory.observe(world);
    if (k < first || (k - first) % eval_every != 0) continue;

    const double t = static_cast<double>(k) * cfg.dt;
    const auto truth = sim::ground_truth_grid(world, cfg.grid, cfg.ground_truth_bandwidth).grid;
    const auto snap = memory.snapshot(t);
    run.times.push_back(t);
    run.rmse_olm.push_back(grid_rmse(snap.olm, truth));
    run.rmse_pum.push_back(grid_rmse(snap.pum, truth));
    run.rmse_ppum.push_back(grid_rmse(snap.ppum, truth));
    run.rmse_wm.push_back(grid_rmse(snap.wm ? *snap.wm : snap.olm, truth));
    track_total += static_cast<double>(snap.tracks);
  }
  run.avg_olm = mean(run.rmse_olm);
  run.avg_pum = mean(run.rmse_pum);
  run.avg_ppum = mean(run.rmse_ppum);
  run.avg_wm = mean(run.rmse_wm);
  run.mean_tracks = run.times.empty() ? 0.0 : track_total / static_cast<double>(run.times.size());
  return run;
}

Case2Map generate_case2_map(const ScenarioConfig& cfg, int crowd, std::uint64_t seed) {
  const double side = cfg.map_size;
  const Vec2 lo = cfg.grid.origin;
  const int obstacle_count = static_cast<int>(cfg.experiment_value("obstacle_count", 15));
  const double r_min = cfg.experiment_value("obstacle_radius_min", 0.25);
  const double r_max = cfg.experiment_value("obstacle_radius_max", 0.75);
  const int clusters = std::max(1, static_cast<int>(cfg.experiment_value("clusters", 3)));
  const double cluster_sd = cfg.experiment_value("cluster_sd", 1.0);
  const double margin = cfg.experiment_value("cluster_margin", 4.0);
  const double d_safe = cfg.planner.safety_margin;
  const Vec2 start = cfg.robot_start;
  const Vec2 goal = cfg.robot_goal;

  std::mt19937_64 rng(splitmix(seed));
  std::uniform_real_distribution<double> along(1.0, side - 1.0);
  std::uniform_real_distribution<double> radius(r_min, r_max);
  std::uniform_real_distribution<double> inner(margin, side - margin);
  std::normal_distribution<double> spread(0.0, cluster_sd);

  Case2Map map;
  for (;;) {
    ++map.attempts;
    if (map.attempts > 1000) throw std::runtime_error("case 2: could not draw a connected map");
    map.obstacles.clear();
    while (static_cast<int>(map.obstacles.size()) < obstacle_count) {
      Obstacle o{lo + Vec2(along(rng), along(rng)), radius(rng)};
      const double keep_out = o.radius + d_safe + 0.5;
      if ((o.center - start).norm() < keep_out || (o.center - goal).norm() < keep_out) continue;
      map.obstacles.push_back(o);
    }
    GridGraph graph(cfg.grid, map.obstacles, d_safe);
    try {
      astar(graph, start, goal);
    } catch (const NoPath&) {
      continue;
    } catch (const std::invalid_argument&) {
      continue;
    }
    break;
  }

  std::vector<Vec2> centers;
  for (int c = 0; c < clusters; ++c) centers.push_back(lo + Vec2(inner(rng), inner(rng)));
  map.agents.clear();
  int guard = 0;
  while (static_cast<int>(map.agents.size()) < crowd) {
    if (++guard > 1000000) throw std::runtime_error("case 2: could not place pedestrians");
    const Vec2& c = centers[map.agents.size() % centers.size()];
    const Vec2 p = c + Vec2(spread(rng), spread(rng));
    if (!cfg.grid.contains(p)) continue;
    bool clear = (p - start).norm() > 1.0 && (p - goal).norm() > 1.0;
    for (const auto& o : map.obstacles) clear = clear && (p - o.center).norm() > o.radius + 0.2;
    if (clear) map.agents.push_back(p);
  }
  return map;
}

Case2Run run_case2(const ScenarioConfig& cfg, int crowd, int map_index, std::uint64_t seed) {
  Case2Run run;
  run.crowd = crowd;
  run.map_index = map_index;
  run.seed = seed;
  const auto map = generate_case2_map(cfg, crowd, seed);
  const Vec2 start = cfg.robot_start;
  const Vec2 goal = cfg.robot_goal;

  sim::WorldState frozen;
  for (std::size_t k = 0; k < map.agents.size(); ++k) {
    sim::Agent a;
    a.id = static_cast<int>(k);
    a.position = map.agents[k];
    frozen.agents.push_back(a);
  }
  const auto truth = sim::ground_truth_grid(frozen, cfg.grid, cfg.ground_truth_bandwidth).grid;
  const GridGraph plain(cfg.grid, map.obstacles, cfg.planner.safety_margin);
  const GridGraph congested(cfg.grid, map.obstacles, cfg.planner.safety_margin, &truth);

  const auto a_star = grid_path(plain, start, goal, 0.0);
  run.methods.push_back(score_path("A*", a_star.points, true, map.agents, cfg.travel));

  const auto rho = plan(start, goal, truth, map.obstacles, cfg.planner, splitmix(seed ^ 0xabcdefULL));
  run.methods.push_back(score_path("RHO", rho.reached ? rho.valid_path : a_star.points, rho.reached, map.agents,
                                   cfg.travel));

  for (auto preset : {CongestionPreset::CG1, CongestionPreset::CG2}) {
    const auto p = grid_path(congested, start, goal, preset_lambda(preset, cfg.grid));
    run.methods.push_back(
        score_path(preset == CongestionPreset::CG1 ? "CG1" : "CG2", p.points, true, map.agents, cfg.travel));
  }
  run.ts_rho = eval::improvement_index(run.methods[0].travel_time, run.methods[1].travel_time);
  return run;
}

std::vector<Activation> activation_schedule(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.attractors.empty()) throw std::invalid_argument("case 3: scenario defines no attractor sites");
  const int count = static_cast<int>(cfg.experiment_value("activation_max", 20));
  const double start = cfg.experiment_value("activation_start", 60.0);
  const double spacing = cfg.experiment_value("activation_spacing", 30.0);
  const double length = cfg.experiment_value("activation_length", 120.0);

  std::mt19937_64 rng(splitmix(seed ^ 0xac71fa7eULL));
  std::vector<std::size_t> order;
  std::vector<Activation> out;
  for (int i = 0; i < count; ++i) {
    if (order.empty()) {
      for (std::size_t s = 0; s < cfg.attractors.size(); ++s) order.push_back(s);
      std::shuffle(order.begin(), order.end(), rng);
    }
    const auto site = order.back();
    order.pop_back();
    const double on = start + spacing * i;
    out.push_back({cfg.attractors[site].id, on, on + length});
  }
  return out;
}

ScenarioConfig with_activations(const ScenarioConfig& cfg, const std::vector<Activation>& schedule, int count) {
  if (count < 0 || count > static_cast<int>(schedule.size())) {
    throw std::invalid_argument("case 3: activation count outside the schedule");
  }
  ScenarioConfig out = cfg;
  out.attractors.clear();
  for (int i = 0; i < count; ++i) {
    const auto& act = schedule[static_cast<std::size_t>(i)];
    auto site = std::find_if(cfg.attractors.begin(), cfg.attractors.end(),
                             [&](const Attractor& a) { return a.id == act.site; });
    Attractor a = *site;
    a.id = act.site + "#" + std::to_string(i + 1);
    a.t_on = act.t_on;
    a.t_off = act.t_off;
    out.attractors.push_back(a);
  }
  return out;
}

Case3Run run_case3(const ScenarioConfig& base, const OlmBank& olm, int activations, std::uint64_t seed) {
  const auto schedule = activation_schedule(base, seed);
  const ScenarioConfig cfg = with_activations(base, schedule, activations);
  const double q_start = cfg.experiment_value("query_start", 120.0);
  const double q_spacing = cfg.experiment_value("query_spacing", 30.0);
  const int q_count = static_cast<int>(cfg.experiment_value("query_count", 20));
  const int scan = scan_interval(cfg);
  const double side = cfg.map_size;
  const Vec2 lo = cfg.grid.origin;

  const std::vector<std::pair<Vec2, Vec2>> pairs{
      {cfg.robot_start, cfg.robot_goal},
      {Vec2(cfg.robot_start.x(), 2 * lo.y() + side - cfg.robot_start.y()),
       Vec2(cfg.robot_goal.x(), 2 * lo.y() + side - cfg.robot_goal.y())}};

  std::vector<long> query_steps;
  for (int j = 0; j < q_count; ++j) query_steps.push_back(to_steps(q_start + q_spacing * j, cfg.dt));

  const GridGraph plain(cfg.grid, cfg.obstacles, cfg.planner.safety_margin);

  Case3Run run;
  run.activations = activations;
  run.seed = seed;
  auto world = sim::initial_state(cfg, seed);
  MemoryPipeline memory(cfg, olm, splitmix(seed ^ 0x5e5e5e5eULL));
  std::size_t next_query = 0;
  for (long k = 1; next_query < query_steps.size(); ++k) {
    world = sim::step(std::move(world), cfg, cfg.dt);
    if (k % scan == 0) memory.observe(world);
    if (k != query_steps[next_query]) continue;
    ++next_query;

    const double t = static_cast<double>(k) * cfg.dt;
    const auto snap = memory.snapshot(t);
    const auto agents = world.positions();
    const GridGraph cg_olm(cfg.grid, cfg.obstacles, cfg.planner.safety_margin, &snap.olm);
    const GridGraph cg_pum(cfg.grid, cfg.obstacles, cfg.planner.safety_margin, &snap.pum);

    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const auto& [s, g] = pairs[q];
      Case3Query row;
      row.time = t;
      row.query = static_cast<int>(q);
      const auto a_star = astar(plain, s, g);
      row.methods.push_back(score_path("A*", a_star.points, true, agents, cfg.travel));
      const std::uint64_t plan_seed = splitmix(seed ^ static_cast<std::uint64_t>(k * 4 + static_cast<long>(q)));
      for (const auto* layer : {&snap.ppum, &snap.olm}) {
        const auto rho = plan(s, g, *layer, cfg.obstacles, cfg.planner, plan_seed);
        row.methods.push_back(score_path(layer == &snap.ppum ? "RHO+PPUM" : "RHO+OLM",
                                         rho.reached ? rho.valid_path : a_star.points, rho.reached, agents,
                                         cfg.travel));
      }
      const auto cg1 = congestion_astar(cg_olm, s, g, preset_lambda(CongestionPreset::CG1, cfg.grid));
      row.methods.push_back(score_path("CG1+OLM", cg1.points, true, agents, cfg.travel));
      const auto cg2 = congestion_astar(cg_pum, s, g, preset_lambda(CongestionPreset::CG2, cfg.grid));
      row.methods.push_back(score_path("CG2+PUM", cg2.points, true, agents, cfg.travel));

      const double t_rho = row.methods[1].travel_time;
      row.ts_astar = eval::improvement_index(row.methods[0].travel_time, t_rho);
      row.ts_olm = eval::improvement_index(row.methods[2].travel_time, t_rho);
      row.ts_cg1 = eval::improvement_index(row.methods[3].travel_time, t_rho);
      row.ts_cg2 = eval::improvement_index(row.methods[4].travel_time, t_rho);
      run.queries.push_back(std::move(row));
    }
  }
  double total = 0.0;
  for (const auto& q : run.queries) total += q.ts_astar;
  run.mean_ts_astar = run.queries.empty() ? 0.0 : total / static_cast<double>(run.queries.size());
  return run;
}

}  // namespace crowdnav::app
