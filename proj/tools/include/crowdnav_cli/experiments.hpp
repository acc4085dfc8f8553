#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowdnav/scenario.hpp"
#include "crowdnav_cli/pipeline.hpp"

namespace crowdnav::app {

/// Seed of replication `index` under master seed `master`.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);

// ---- Case 1: memory accuracy in a corridor with a persistent attractor ----

struct Case1Run {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> rmse_olm, rmse_pum, rmse_ppum, rmse_wm;
  double avg_olm = 0.0, avg_pum = 0.0, avg_ppum = 0.0, avg_wm = 0.0;
  double mean_tracks = 0.0;
};

/// One seeded run: warm up, then score every memory against the ground truth
/// at each evaluation instant. Keys: warmup, eval_duration, eval_step.
Case1Run run_case1(const ScenarioConfig& cfg, const OlmBank& olm, std::uint64_t seed);

// ---- Case 2: static crowds on random obstacle maps ----

struct Case2Map {
  std::vector<Obstacle> obstacles;
  std::vector<Vec2> agents;
  int attempts = 0;  // maps drawn until one was connected
};

/// Random obstacles and clustered pedestrians. Keys: obstacle_count,
/// obstacle_radius_min/max, clusters, cluster_sd, cluster_margin.
Case2Map generate_case2_map(const ScenarioConfig& cfg, int crowd, std::uint64_t seed);

struct MethodOutcome {
  std::string method;
  bool reached = true;
  double length = 0.0;
  int corridor_count = 0;
  double travel_time = 0.0;
};

struct Case2Run {
  int crowd = 0;
  int map_index = 0;
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> methods;  // A*, RHO, CG1, CG2
  double ts_rho = 0.0;                 // vs A*
};

Case2Run run_case2(const ScenarioConfig& cfg, int crowd, int map_index, std::uint64_t seed);

// ---- Case 3: plaza with scheduled attractor activations ----

struct Activation {
  std::string site;
  double t_on = 0.0;
  double t_off = 0.0;
};

/// The full seeded activation schedule; level N_a uses its first N_a entries.
/// Keys: activation_max, activation_start, activation_spacing, activation_length.
std::vector<Activation> activation_schedule(const ScenarioConfig& cfg, std::uint64_t seed);

/// Scenario copy whose attractors are the first `count` activations.
ScenarioConfig with_activations(const ScenarioConfig& cfg, const std::vector<Activation>& schedule, int count);

struct Case3Query {
  double time = 0.0;
  int query = 0;  // index into the start/goal pairs
  std::vector<MethodOutcome> methods;  // A*, RHO+PPUM, RHO+OLM, CG1+OLM, CG2+PUM
  double ts_astar = 0.0;
  double ts_olm = 0.0;
  double ts_cg1 = 0.0;
  double ts_cg2 = 0.0;
};

struct Case3Run {
  int activations = 0;
  std::uint64_t seed = 0;
  std::vector<Case3Query> queries;
  double mean_ts_astar = 0.0;
};

/// Query instants and start/goal pairs come from the keys query_start,
/// query_spacing, query_count and the robot start/goal (plus the mirrored pair).
Case3Run run_case3(const ScenarioConfig& cfg, const OlmBank& olm, int activations, std::uint64_t seed);

}  // namespace crowdnav::app
