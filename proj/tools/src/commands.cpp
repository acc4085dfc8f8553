#include "crowdnav_cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowdnav/baselines.hpp"
#include "crowdnav/eval.hpp"
#include "crowdnav/grid_io.hpp"
#include "crowdnav/planner.hpp"
#include "crowdnav/scenario.hpp"
#include "crowdnav/simulator.hpp"
#include "crowdnav_cli/experiments.hpp"
#include "crowdnav_cli/pipeline.hpp"
#include "crowdnav_cli/workers.hpp"

#ifndef CROWDNAV_DEFAULT_SCENARIO_DIR
#define CROWDNAV_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace crowdnav::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kMethods{"rho", "astar", "cg1", "cg2"};
const std::vector<std::string> kMemories{"olm", "pum", "ppum", "wm"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "a*") s = "astar";
  return s;
}

// Canonical, de-duplicated selection in catalogue order. Empty means all.
std::vector<std::string> select(const std::vector<std::string>& requested, const std::vector<std::string>& catalogue,
                                const char* what) {
  if (requested.empty()) return catalogue;
  std::vector<std::string> wanted;
  for (const auto& r : requested) {
    const auto name = lower(r);
    if (std::find(catalogue.begin(), catalogue.end(), name) == catalogue.end()) {
      throw ConfigError(std::string("unknown ") + what + " '" + r + "'");
    }
    wanted.push_back(name);
  }
  std::vector<std::string> out;
  for (const auto& c : catalogue) {
    if (std::find(wanted.begin(), wanted.end(), c) != wanted.end()) out.push_back(c);
  }
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string csv_point_rows(const std::vector<Vec2>& pts) {
  std::string s = "x,y\n";
  for (const auto& p : pts) s += num(p.x()) + "," + num(p.y()) + "\n";
  return s;
}

std::vector<Vec2> read_path_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open path file " + file.string());
  std::vector<Vec2> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "x,y") continue;
    double x = 0, y = 0;
    char comma = 0;
    std::istringstream row(line);
    if (!(row >> x >> comma >> y) || comma != ',') {
      throw ConfigError(file.string() + ": line " + std::to_string(line_no) + ": expected 'x,y'");
    }
    pts.emplace_back(x, y);
  }
  return pts;
}

ProbabilityGrid read_grid(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("cannot open grid file " + file.string());
  try {
    return io::load_grid(file);
  } catch (const std::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  void text(const std::string& name, const std::string& body) const { io::write_file(dir_ / name, body); }
  void bytes(const std::string& name, const std::vector<std::uint8_t>& body) const {
    io::write_file(dir_ / name, body);
  }
  void json_file(const std::string& name, const json& j) const { text(name, j.dump(2) + "\n"); }
  void grid(const std::string& stem, const ProbabilityGrid& g) const {
    bytes(stem + ".grid", io::encode_binary(g));
    bytes(stem + ".pgm", io::encode_pgm(g));
  }
  [[nodiscard]] const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

json header(const ScenarioConfig& cfg, const std::string& command, const std::string& scenario_path) {
  return {{"command", command},
          {"scenario", scenario_path},
          {"scenario_name", cfg.name},
          {"fingerprint", cfg.fingerprint()}};
}

json vec_json(const std::vector<double>& v) { return json(v); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------- options

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> methods;
  std::vector<std::string> memories;
};

ScenarioConfig load(const Common& c) { return load_scenario(c.scenario); }

std::uint64_t seed_of(const Common& c, const ScenarioConfig& cfg) { return c.seed ? *c.seed : cfg.seed; }

// Runs the world and the memory pipeline up to the step nearest `time`.
struct Replay {
  sim::WorldState world;
  std::optional<MemorySnapshot> memory;
};

Replay replay(const ScenarioConfig& cfg, std::uint64_t seed, double time, const OlmBank* olm) {
  if (!(time >= 0.0)) throw ConfigError("--time must be >= 0");
  const long steps = std::lround(time / cfg.dt);
  Replay r{sim::initial_state(cfg, seed), std::nullopt};
  std::optional<MemoryPipeline> pipeline;
  if (olm) pipeline.emplace(cfg, *olm, seed ^ 0x5e5e5e5eULL);
  const int scan = scan_interval(cfg);
  for (long k = 1; k <= steps; ++k) {
    r.world = sim::step(std::move(r.world), cfg, cfg.dt);
    if (pipeline && k % scan == 0) pipeline->observe(r.world);
  }
  if (pipeline) r.memory = pipeline->snapshot(static_cast<double>(steps) * cfg.dt);
  return r;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common c;
  std::optional<double> duration;
  double log_every = 1.0;
  double snapshot_every = 10.0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto cfg = load(a.c);
  const std::uint64_t seed = seed_of(a.c, cfg);
  const double duration = a.duration.value_or(cfg.duration);
  if (!(duration > 0.0)) throw ConfigError("--duration must be > 0");
  if (!(a.log_every > 0.0) || !(a.snapshot_every > 0.0)) throw ConfigError("log intervals must be > 0");

  const Output dir(a.c.out);
  fs::create_directories(dir.dir() / "truth");
  const long steps = std::lround(duration / cfg.dt);
  const long log_stride = std::max(1L, std::lround(a.log_every / cfg.dt));
  const long snap_stride = std::max(1L, std::lround(a.snapshot_every / cfg.dt));

  std::string traj = sim::kTrajectoryHeader;
  std::string events = "time,kind,subject\n";
  std::string snaps = "index,time,agents,file\n";
  int activations = 0;
  int max_agents = 0;
  auto world = sim::initial_state(cfg, seed);
  for (long k = 1; k <= steps; ++k) {
    world = sim::step(std::move(world), cfg, cfg.dt);
    for (const auto& e : world.events) {
      events += num(e.time) + "," + e.kind + "," + e.subject + "\n";
      activations += e.kind == "attractor_on";
    }
    max_agents = std::max(max_agents, static_cast<int>(world.agents.size()));
    if (k % log_stride == 0) traj += sim::trajectory_rows(world);
    if (k % snap_stride == 0) {
      const long index = k / snap_stride;
      char name[64];
      std::snprintf(name, sizeof(name), "truth/%06ld.grid", index);
      const auto gt = sim::ground_truth_grid(world, cfg.grid, cfg.ground_truth_bandwidth);
      dir.bytes(name, io::encode_binary(gt.grid));
      snaps += std::to_string(index) + "," + num(world.time) + "," + std::to_string(world.agents.size()) + "," +
               name + "\n";
    }
  }
  dir.text("trajectories.csv", traj);
  dir.text("events.csv", events);
  dir.text("snapshots.csv", snaps);

  json report = header(cfg, "simulate", a.c.scenario);
  report["seed"] = seed;
  report["duration"] = duration;
  report["dt"] = cfg.dt;
  report["spawned"] = world.spawned;
  report["exited"] = world.exited;
  report["max_agents"] = max_agents;
  report["attractor_activations"] = activations;
  dir.json_file("simulate.json", report);
  out << "simulated " << duration << " s, " << world.spawned << " pedestrians, " << activations
      << " attractor activations -> " << a.c.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fuse

struct FuseArgs {
  Common c;
  double time = 0.0;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const auto cfg = load(a.c);
  const auto memories = select(a.c.memories, kMemories, "memory");
  const std::uint64_t seed = seed_of(a.c, cfg);
  const auto bank = fit_olm_bank(cfg);
  const auto r = replay(cfg, seed, a.time, &bank);
  const auto& snap = *r.memory;
  const auto truth = sim::ground_truth_grid(r.world, cfg.grid, cfg.ground_truth_bandwidth).grid;

  const Output dir(a.c.out);
  dir.grid("truth", truth);
  json report = header(cfg, "fuse", a.c.scenario);
  report["seed"] = seed;
  report["time"] = snap.time;
  report["tracks"] = snap.tracks;
  report["sigma_bar"] = snap.sigma_bar ? json(*snap.sigma_bar) : json(nullptr);
  json rmse = json::object();
  for (const auto& m : memories) {
    const ProbabilityGrid* g = m == "olm" ? &snap.olm : m == "pum" ? &snap.pum : m == "ppum" ? &snap.ppum : nullptr;
    if (m == "wm") {
      if (!snap.wm) continue;  // nothing tracked yet
      g = &*snap.wm;
    }
    dir.grid(m, *g);
    rmse[m] = grid_rmse(*g, truth);
  }
  report["rmse_vs_truth"] = rmse;
  dir.json_file("fuse.json", report);
  out << "fused memories at t=" << snap.time << " (" << snap.tracks << " tracks) -> " << a.c.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
  Common c;
  std::string grid;
  std::vector<double> start, goal;
};

Vec2 point_or(const std::vector<double>& v, const Vec2& fallback, const char* flag) {
  if (v.empty()) return fallback;
  if (v.size() != 2) throw ConfigError(std::string(flag) + " takes two numbers");
  return {v[0], v[1]};
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const auto cfg = load(a.c);
  const auto methods = select(a.c.methods.empty() ? std::vector<std::string>{"rho"} : a.c.methods, kMethods,
                              "method");
  const std::uint64_t seed = seed_of(a.c, cfg);
  const Vec2 start = point_or(a.start, cfg.robot_start, "--start");
  const Vec2 goal = point_or(a.goal, cfg.robot_goal, "--goal");
  const ProbabilityGrid fm = a.grid.empty() ? ProbabilityGrid::uniform(cfg.grid) : read_grid(a.grid);

  const Output dir(a.c.out);
  json report = header(cfg, "plan", a.c.scenario);
  report["seed"] = seed;
  report["memory_grid"] = a.grid;
  report["start"] = {start.x(), start.y()};
  report["goal"] = {goal.x(), goal.y()};
  json results = json::object();
  for (const auto& m : methods) {
    json r;
    std::vector<Vec2> path;
    if (m == "rho") {
      const auto res = plan(start, goal, fm, cfg.obstacles, cfg.planner, seed);
      path = res.valid_path;
      r["reached"] = res.reached;
      r["iterations"] = res.iterations.size();
      if (!res.diagnostic.empty()) r["diagnostic"] = res.diagnostic;
    } else {
      const GridGraph graph(fm.spec(), cfg.obstacles, cfg.planner.safety_margin, &fm);
      try {
        const double lambda = m == "astar" ? 0.0
                              : preset_lambda(m == "cg1" ? CongestionPreset::CG1 : CongestionPreset::CG2, fm.spec());
        const auto gp = lambda == 0.0 ? astar(graph, start, goal) : congestion_astar(graph, start, goal, lambda);
        path = gp.points;
        r["reached"] = true;
        r["search_cost"] = gp.cost;
      } catch (const NoPath&) {
        r["reached"] = false;
        r["diagnostic"] = "no path";
      }
    }
    r["length"] = path.size() >= 2 ? polyline_length(path) : 0.0;
    r["points"] = path.size();
    r["file"] = "path_" + m + ".csv";
    dir.text("path_" + m + ".csv", csv_point_rows(path));
    results[m] = r;
    out << m << ": " << (r["reached"].get<bool>() ? "reached" : "not reached") << ", length "
        << num(r["length"].get<double>()) << " m\n";
  }
  report["methods"] = results;
  dir.json_file("plan.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  Common c;
  std::vector<std::string> paths;
  std::string grid, truth;
  double time = 0.0;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.paths.empty() && a.grid.empty()) throw ConfigError("evaluate needs --path and/or --memory");
  if (a.grid.empty() != a.truth.empty()) throw ConfigError("--memory and --truth go together");
  const auto cfg = load(a.c);
  const std::uint64_t seed = seed_of(a.c, cfg);

  const Output dir(a.c.out);
  json report = header(cfg, "evaluate", a.c.scenario);
  report["seed"] = seed;
  if (!a.paths.empty()) {
    const auto world = replay(cfg, seed, a.time, nullptr).world;
    const auto agents = world.positions();
    std::string csv = "path,length,corridor_count,travel_time\n";
    json rows = json::array();
    std::optional<double> bench;
    for (const auto& file : a.paths) {
      const auto path = read_path_csv(file);
      if (path.size() < 2) throw ConfigError(file + ": a path needs at least two points");
      const int count = eval::corridor_count(path, agents, cfg.travel.half_width);
      const double t = eval::expected_travel_time(path, count, cfg.travel);
      if (!bench) bench = t;
      const double ts = eval::improvement_index(*bench, t);
      csv += file + "," + num(polyline_length(path)) + "," + std::to_string(count) + "," + num(t) + "\n";
      rows.push_back({{"path", file},
                      {"length", polyline_length(path)},
                      {"corridor_count", count},
                      {"travel_time", t},
                      {"ts_vs_first", ts}});
      out << file << ": travel time " << num(t) << " s (" << count << " in corridor)\n";
    }
    dir.text("evaluate_paths.csv", csv);
    report["time"] = world.time;
    report["agents"] = agents.size();
    report["paths"] = rows;
  }
  if (!a.grid.empty()) {
    const double rmse = grid_rmse(read_grid(a.grid), read_grid(a.truth));
    report["rmse"] = rmse;
    out << "rmse " << num(rmse) << "\n";
  }
  dir.json_file("evaluate.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------- reproduce

struct ReproduceArgs {
  Common c;
  int case_id = 0;
  std::optional<int> reps;
};

int reps_or(const ReproduceArgs& a, const ScenarioConfig& cfg, const char* key, double fallback) {
  const int n = a.reps ? *a.reps : static_cast<int>(cfg.experiment_value(key, fallback));
  if (n < 1) throw ConfigError("--reps must be >= 1");
  return n;
}

void reproduce_case1(const ReproduceArgs& a, const ScenarioConfig& cfg, const Output& dir, json& report) {
  const auto memories = select(a.c.memories, kMemories, "memory");
  const std::uint64_t master = seed_of(a.c, cfg);
  const int reps = reps_or(a, cfg, "reps", 20);
  const auto bank = fit_olm_bank(cfg);

  std::vector<Case1Run> runs(static_cast<std::size_t>(reps));
  parallel_for(runs.size(), worker_count(),
               [&](std::size_t i) { runs[i] = run_case1(cfg, bank, replication_seed(master, i)); });

  auto pick = [](const Case1Run& r, const std::string& m) -> const std::vector<double>& {
    return m == "olm" ? r.rmse_olm : m == "pum" ? r.rmse_pum : m == "ppum" ? r.rmse_ppum : r.rmse_wm;
  };
  auto avg = [](const Case1Run& r, const std::string& m) {
    return m == "olm" ? r.avg_olm : m == "pum" ? r.avg_pum : m == "ppum" ? r.avg_ppum : r.avg_wm;
  };

  std::string runs_csv = "rep,seed";
  std::string series_csv = "rep,time";
  for (const auto& m : memories) runs_csv += "," + m, series_csv += "," + m;
  runs_csv += ",mean_tracks\n";
  series_csv += "\n";
  json seeds = json::array();
  std::map<std::string, std::vector<double>> per_memory;
  int ppum_wins = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    seeds.push_back(r.seed);
    runs_csv += std::to_string(i) + "," + std::to_string(r.seed);
    for (const auto& m : memories) {
      runs_csv += "," + num(avg(r, m));
      per_memory[m].push_back(avg(r, m));
    }
    runs_csv += "," + num(r.mean_tracks) + "\n";
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      series_csv += std::to_string(i) + "," + num(r.times[k]);
      for (const auto& m : memories) series_csv += "," + num(pick(r, m)[k]);
      series_csv += "\n";
    }
    ppum_wins += r.avg_ppum < r.avg_olm;
  }
  dir.text("case1_runs.csv", runs_csv);
  dir.text("case1_series.csv", series_csv);

  json averages = json::object();
  for (const auto& m : memories) averages[m] = mean_of(per_memory[m]);
  double olm = 0, pum = 0, ppum = 0;
  for (const auto& r : runs) olm += r.avg_olm, pum += r.avg_pum, ppum += r.avg_ppum;
  report["master_seed"] = master;
  report["seeds"] = seeds;
  report["reps"] = reps;
  report["memories"] = memories;
  report["average_rmse"] = averages;
  report["ppum_beats_olm_fraction"] = static_cast<double>(ppum_wins) / reps;
  report["ordering"] = {{"ppum_lt_pum", ppum < pum}, {"pum_lt_olm", pum < olm}, {"ppum_lt_olm", ppum < olm}};
}

void reproduce_case2(const ReproduceArgs& a, const ScenarioConfig& cfg, const Output& dir, json& report) {
  const auto methods = select(a.c.methods, kMethods, "method");
  const std::uint64_t master = seed_of(a.c, cfg);
  const int maps = reps_or(a, cfg, "maps", 30);
  const std::vector<int> crowds{static_cast<int>(cfg.experiment_value("crowd_small", 30)),
                                static_cast<int>(cfg.experiment_value("crowd_medium", 60)),
                                static_cast<int>(cfg.experiment_value("crowd_large", 100))};

  std::vector<Case2Run> runs(crowds.size() * static_cast<std::size_t>(maps));
  parallel_for(runs.size(), worker_count(), [&](std::size_t i) {
    const int crowd = crowds[i / static_cast<std::size_t>(maps)];
    const int m = static_cast<int>(i % static_cast<std::size_t>(maps));
    runs[i] = run_case2(cfg, crowd, m, replication_seed(master * 1000 + static_cast<std::uint64_t>(crowd), m));
  });

  const std::map<std::string, std::string> label{{"astar", "A*"}, {"rho", "RHO"}, {"cg1", "CG1"}, {"cg2", "CG2"}};
  std::string csv = "crowd,map,seed,method,reached,length,corridor_count,travel_time\n";
  json seeds = json::array();
  json table = json::array();
  for (std::size_t ci = 0; ci < crowds.size(); ++ci) {
    std::vector<double> ts;
    std::map<std::string, std::vector<double>> times;
    int reached = 0;
    for (int m = 0; m < maps; ++m) {
      const auto& r = runs[ci * static_cast<std::size_t>(maps) + static_cast<std::size_t>(m)];
      seeds.push_back(r.seed);
      ts.push_back(r.ts_rho);
      for (const auto& o : r.methods) {
        if (o.method == "RHO") reached += o.reached;
        const auto key = std::find_if(label.begin(), label.end(), [&](auto& kv) { return kv.second == o.method; });
        if (!has(methods, key->first)) continue;
        times[key->first].push_back(o.travel_time);
        csv += std::to_string(r.crowd) + "," + std::to_string(r.map_index) + "," + std::to_string(r.seed) + "," +
               o.method + "," + (o.reached ? "1" : "0") + "," + num(o.length) + "," +
               std::to_string(o.corridor_count) + "," + num(o.travel_time) + "\n";
      }
    }
    json mean_times = json::object();
    for (const auto& m : methods) mean_times[label.at(m)] = mean_of(times[m]);
    const auto positive = std::count_if(ts.begin(), ts.end(), [](double v) { return v > 0.0; });
    table.push_back({{"crowd", crowds[ci]},
                     {"mean_travel_time", mean_times},
                     {"mean_ts_rho_vs_astar", mean_of(ts)},
                     {"positive_fraction", static_cast<double>(positive) / maps},
                     {"rho_reached", reached}});
  }
  dir.text("case2_runs.csv", csv);
  report["master_seed"] = master;
  report["seeds"] = seeds;
  report["maps"] = maps;
  report["methods"] = methods;
  report["crowds"] = table;
}

void reproduce_case3(const ReproduceArgs& a, const ScenarioConfig& cfg, const Output& dir, json& report) {
  const auto methods = select(a.c.methods, kMethods, "method");
  const std::uint64_t master = seed_of(a.c, cfg);
  const int seeds_n = reps_or(a, cfg, "seeds", 3);
  const std::vector<int> levels{0, 5, 10, 15, 20};
  const double q_start = cfg.experiment_value("query_start", 120.0);
  const double slice = cfg.experiment_value("slice_length", 300.0);
  const auto bank = fit_olm_bank(cfg);

  std::vector<Case3Run> runs(levels.size() * static_cast<std::size_t>(seeds_n));
  parallel_for(runs.size(), worker_count(), [&](std::size_t i) {
    const int level = levels[i / static_cast<std::size_t>(seeds_n)];
    runs[i] = run_case3(cfg, bank, level, replication_seed(master, i % static_cast<std::size_t>(seeds_n)));
  });

  // Method rows are reported under the planner that produced them.
  const std::map<std::string, std::string> family{
      {"A*", "astar"}, {"RHO+PPUM", "rho"}, {"RHO+OLM", "rho"}, {"CG1+OLM", "cg1"}, {"CG2+PUM", "cg2"}};
  std::string csv = "activations,seed,time,query,method,reached,length,corridor_count,travel_time\n";
  json seeds = json::array();
  for (int s = 0; s < seeds_n; ++s) seeds.push_back(replication_seed(master, static_cast<std::uint64_t>(s)));
  json by_level = json::array();
  json by_slice = json::array();
  for (std::size_t li = 0; li < levels.size(); ++li) {
    std::vector<double> ts_astar, ts_olm, ts_cg1, ts_cg2, per_seed;
    std::map<long, std::vector<double>> slices;
    for (int s = 0; s < seeds_n; ++s) {
      const auto& r = runs[li * static_cast<std::size_t>(seeds_n) + static_cast<std::size_t>(s)];
      per_seed.push_back(r.mean_ts_astar);
      for (const auto& q : r.queries) {
        ts_astar.push_back(q.ts_astar);
        ts_olm.push_back(q.ts_olm);
        ts_cg1.push_back(q.ts_cg1);
        ts_cg2.push_back(q.ts_cg2);
        slices[static_cast<long>(std::floor((q.time - q_start) / slice))].push_back(q.ts_astar);
        for (const auto& o : q.methods) {
          if (!has(methods, family.at(o.method))) continue;
          csv += std::to_string(r.activations) + "," + std::to_string(r.seed) + "," + num(q.time) + "," +
                 std::to_string(q.query) + "," + o.method + "," + (o.reached ? "1" : "0") + "," + num(o.length) +
                 "," + std::to_string(o.corridor_count) + "," + num(o.travel_time) + "\n";
        }
      }
    }
    by_level.push_back({{"activations", levels[li]},
                        {"queries", ts_astar.size()},
                        {"mean_ts_vs_astar", mean_of(ts_astar)},
                        {"mean_ts_vs_rho_olm", mean_of(ts_olm)},
                        {"mean_ts_vs_cg1", mean_of(ts_cg1)},
                        {"mean_ts_vs_cg2", mean_of(ts_cg2)},
                        {"per_seed_ts_vs_astar", vec_json(per_seed)}});
    for (const auto& [k, v] : slices) {
      by_slice.push_back({{"activations", levels[li]},
                          {"from", q_start + slice * static_cast<double>(k)},
                          {"to", q_start + slice * static_cast<double>(k + 1)},
                          {"mean_ts_vs_astar", mean_of(v)}});
    }
  }
  dir.text("case3_queries.csv", csv);
  report["master_seed"] = master;
  report["seeds"] = seeds;
  report["methods"] = methods;
  report["by_activations"] = by_level;
  report["by_time"] = by_slice;
}

int cmd_reproduce(ReproduceArgs a, std::ostream& out) {
  static const std::map<int, const char*> bundled{
      {1, "case1_corridor.yaml"}, {2, "case2_random.yaml"}, {3, "case3_plaza.yaml"}};
  if (!bundled.count(a.case_id)) throw ConfigError("--case must be 1, 2 or 3");
  if (a.c.scenario.empty()) a.c.scenario = (fs::path(bundled_scenario_dir()) / bundled.at(a.case_id)).string();
  const auto cfg = load(a.c);
  const Output dir(a.c.out);
  json report = header(cfg, "reproduce", a.c.scenario);
  report["case"] = a.case_id;
  if (a.case_id == 1) reproduce_case1(a, cfg, dir, report);
  if (a.case_id == 2) reproduce_case2(a, cfg, dir, report);
  if (a.case_id == 3) reproduce_case3(a, cfg, dir, report);
  const std::string name = "case" + std::to_string(a.case_id) + "_report.json";
  dir.json_file(name, report);
  out << "case " << a.case_id << " report -> " << (dir.dir() / name).string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* cmd, Common& c, bool scenario_required) {
  auto* s = cmd->add_option("--scenario", c.scenario, "Scenario YAML file");
  if (scenario_required) s->required();
  cmd->add_option("--seed", c.seed, "Seed (defaults to the scenario seed)");
  cmd->add_option("--out", c.out, "Output directory")->required();
}

}  // namespace

std::string bundled_scenario_dir() {
  if (const char* env = std::getenv("CROWDNAV_SCENARIO_DIR")) return env;
  return CROWDNAV_DEFAULT_SCENARIO_DIR;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crowd-aware memory fusion and path planning toolkit", "crowdnav"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run the crowd simulator and log trajectories");
  add_common(simulate, sim_args.c, true);
  simulate->add_option("--duration", sim_args.duration, "Seconds to simulate (default: scenario duration)");
  simulate->add_option("--log-every", sim_args.log_every, "Trajectory log interval, s");
  simulate->add_option("--snapshot-every", sim_args.snapshot_every, "Ground-truth snapshot interval, s");

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "Build WM, OLM, PUM and PPUM grids at one instant");
  add_common(fuse, fuse_args.c, true);
  fuse->add_option("--time", fuse_args.time, "Instant to fuse at, s")->required();
  fuse->add_option("--memory", fuse_args.c.memories, "Memories to write: olm pum ppum wm");

  PlanArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan", "Plan on a memory grid");
  add_common(plan_cmd, plan_args.c, true);
  plan_cmd->add_option("--memory", plan_args.grid, "Memory grid file (.grid or .json); uniform when omitted");
  plan_cmd->add_option("--method", plan_args.c.methods, "Planners: rho astar cg1 cg2");
  plan_cmd->add_option("--start", plan_args.start, "Start x y")->expected(2);
  plan_cmd->add_option("--goal", plan_args.goal, "Goal x y")->expected(2);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score paths against the crowd, or a grid against a truth grid");
  add_common(evaluate, eval_args.c, true);
  evaluate->add_option("--path", eval_args.paths, "Path CSV files; the first is the benchmark");
  evaluate->add_option("--time", eval_args.time, "Crowd instant for path scoring, s");
  evaluate->add_option("--memory", eval_args.grid, "Estimated grid file");
  evaluate->add_option("--truth", eval_args.truth, "Reference grid file");

  ReproduceArgs rep_args;
  auto* reproduce = app.add_subcommand("reproduce", "Run a bundled case study and write its report");
  add_common(reproduce, rep_args.c, false);
  reproduce->add_option("--case", rep_args.case_id, "Case study: 1, 2 or 3")->required();
  reproduce->add_option("--reps", rep_args.reps, "Replications (runs, maps per crowd size, or seeds)");
  reproduce->add_option("--method", rep_args.c.methods, "Methods to report: rho astar cg1 cg2");
  reproduce->add_option("--memory", rep_args.c.memories, "Memories to report: olm pum ppum wm");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args, out);
    if (*fuse) return cmd_fuse(fuse_args, out);
    if (*plan_cmd) return cmd_plan(plan_args, out);
    if (*evaluate) return cmd_evaluate(eval_args, out);
    return cmd_reproduce(rep_args, out);
  } catch (const ScenarioError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace crowdnav::app
