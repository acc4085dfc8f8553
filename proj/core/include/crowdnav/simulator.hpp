#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crowdnav/gridmap.hpp"
#include "crowdnav/scenario.hpp"
#include "crowdnav/tracking.hpp"

namespace crowdnav::sim {

enum class Phase { Transit, Attracted, Dwelling, Resuming };

const char* to_string(Phase phase);

struct Agent {
  int id = 0;
  int flow = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double speed = 1.0;
  Phase phase = Phase::Transit;
  std::vector<Vec2> route;      // remaining targets; the last one is the exit
  std::size_t next = 0;         // index of the current target in `route`
  Vec2 dwell_offset = Vec2::Zero();
  int attractor = -1;           // attractor currently pulling the agent
  double dwell_left = 0.0;
  std::vector<std::uint8_t> visited;  // per attractor
};

struct Event {
  double time = 0.0;
  std::string kind;  // "attractor_on" | "attractor_off"
  std::string subject;
};

/// Full simulation state, including the per-flow random streams, so that
/// `step` is a pure function of (state, config, dt).
struct WorldState {
  double time = 0.0;
  std::vector<Agent> agents;
  int next_id = 0;
  std::vector<double> next_spawn;
  std::vector<std::mt19937_64> flow_rng;
  std::int64_t spawned = 0;
  std::int64_t exited = 0;
  std::vector<Event> events;  // emitted during the most recent step

  [[nodiscard]] std::vector<Vec2> positions() const;
};

/// Initial state: no agents, spawn clocks at each flow's phase, random streams
/// derived from `seed` and the flow index.
WorldState initial_state(const ScenarioConfig& config, std::uint64_t seed);

/// Advances time by dt: spawns due groups, moves agents toward their current
/// target (route point, attractor spot) with wall repulsion, runs the
/// attractor automaton, and despawns agents at their exit gate.
WorldState step(WorldState world, const ScenarioConfig& config, double dt);

/// One noisy position per agent inside the sensor range.
std::vector<Detection> observe(const WorldState& world, const Vec2& robot_pose, const SensorModel& sensor,
                               std::mt19937_64& rng);

struct GroundTruth {
  ProbabilityGrid grid;
  bool empty_world = false;  // grid is uniform because nobody is present
};

/// Equal-weight isotropic kernel density of agent positions.
GroundTruth ground_truth_grid(const WorldState& world, const GridSpec& spec, double bandwidth);

/// Agents strictly inside the attractor's radius.
int agents_near(const WorldState& world, const Vec2& center, double radius);

/// "time,id,flow,x,y,vx,vy,phase" rows for every agent, without header.
std::string trajectory_rows(const WorldState& world);
inline constexpr const char* kTrajectoryHeader = "time,id,flow,x,y,vx,vy,phase\n";

}  // namespace crowdnav::sim
