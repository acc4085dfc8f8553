#include "crowdnav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Cholesky>

namespace crowdnav::sim {

namespace {

constexpr double kWallRange = 0.4;   // m, repulsion starts inside this distance
constexpr double kSpeedFloor = 0.2;  // m/s
constexpr double kArrive = 1e-9;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec2 clamp_to_map(const Vec2& p, const ScenarioConfig& cfg) {
  const Vec2 lo = cfg.grid.origin;
  const Vec2 hi = lo + Vec2::Constant(cfg.map_size);
  return {std::clamp(p.x(), lo.x(), hi.x()), std::clamp(p.y(), lo.y(), hi.y())};
}

Vec2 closest_on_segment(const Vec2& p, const Wall& w) {
  const Vec2 d = w.to - w.from;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return w.from;
  const double t = std::clamp((p - w.from).dot(d) / len2, 0.0, 1.0);
  return w.from + t * d;
}

double normal_draw(std::mt19937_64& rng, double mean, double sd) {
  if (sd <= 0.0) return mean;
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

void spawn_group(WorldState& world, const ScenarioConfig& cfg, int flow_index) {
  const Flow& flow = cfg.flows[static_cast<std::size_t>(flow_index)];
  auto& rng = world.flow_rng[static_cast<std::size_t>(flow_index)];
  const Gate& entry = cfg.gate(flow.entry);
  const Gate& exit = cfg.gate(flow.exit);

  const long size = std::max(1L, std::lround(normal_draw(rng, flow.group.mean, flow.group.sd)));
  const double group_speed = std::max(kSpeedFloor, normal_draw(rng, flow.speed.mean, flow.speed.sd));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (long k = 0; k < size; ++k) {
    const double limit = 2.0 * entry.spread;
    const Vec2 offset(std::clamp(normal_draw(rng, 0.0, entry.spread), -limit, limit),
                      std::clamp(normal_draw(rng, 0.0, entry.spread), -limit, limit));
    const double jitter = std::clamp(normal_draw(rng, 1.0, 0.05), 0.8, 1.2);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const double radius = cfg.dwell_spread * std::sqrt(unit(rng));

    Agent a;
    a.id = world.next_id++;
    a.flow = flow_index;
    a.position = clamp_to_map(entry.position + offset, cfg);
    a.speed = std::max(kSpeedFloor, group_speed * jitter);
    for (const auto& v : flow.via) a.route.push_back(clamp_to_map(v + offset, cfg));
    a.route.push_back(clamp_to_map(exit.position + offset, cfg));
    a.dwell_offset = radius * Vec2(std::cos(angle), std::sin(angle));
    a.visited.assign(cfg.attractors.size(), 0);
    world.agents.push_back(std::move(a));
    ++world.spawned;
  }
}

// Returns false when the agent has left through its exit gate.
bool advance(Agent& a, const ScenarioConfig& cfg, double t_next, double dt) {
  const Vec2 before = a.position;

  if (a.phase == Phase::Transit || a.phase == Phase::Resuming) {
    for (std::size_t k = 0; k < cfg.attractors.size(); ++k) {
      const Attractor& att = cfg.attractors[k];
      if (!a.visited[k] && att.active(t_next) && (a.position - att.center).norm() < att.radius) {
        a.visited[k] = 1;
        a.attractor = static_cast<int>(k);
        a.phase = Phase::Attracted;
        break;
      }
    }
  }

  if (a.phase == Phase::Dwelling) {
    a.dwell_left -= dt;
    if (a.dwell_left <= 0.0) {
      a.phase = Phase::Resuming;
      a.attractor = -1;
    }
    a.velocity = Vec2::Zero();
    return true;
  }

  const bool to_attractor = a.phase == Phase::Attracted;
  const Vec2 target = to_attractor
                          ? Vec2(cfg.attractors[static_cast<std::size_t>(a.attractor)].center + a.dwell_offset)
                          : a.route[a.next];
  const Vec2 to_target = target - a.position;
  const double dist = to_target.norm();
  const double reach = a.speed * dt;

  bool arrived = false;
  if (dist <= reach + kArrive) {
    a.position = target;
    arrived = true;
  } else {
    Vec2 v = a.speed * to_target / dist;
    for (const auto& w : cfg.walls) {
      const Vec2 away = a.position - closest_on_segment(a.position, w);
      const double d = away.norm();
      if (d > 1e-9 && d < kWallRange) v += a.speed * (1.0 - d / kWallRange) * away / d;
    }
    a.position = clamp_to_map(a.position + v * dt, cfg);
  }
  a.velocity = (a.position - before) / dt;

  if (!arrived) return true;
  if (to_attractor) {
    a.phase = Phase::Dwelling;
    a.dwell_left = cfg.attractors[static_cast<std::size_t>(a.attractor)].dwell;
    return true;
  }
  if (a.phase == Phase::Resuming) a.phase = Phase::Transit;
  ++a.next;
  return a.next < a.route.size();
}

}  // namespace

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Transit: return "transit";
    case Phase::Attracted: return "attracted";
    case Phase::Dwelling: return "dwelling";
    case Phase::Resuming: return "resuming";
  }
  return "?";
}

std::vector<Vec2> WorldState::positions() const {
  std::vector<Vec2> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.position);
  return out;
}

WorldState initial_state(const ScenarioConfig& config, std::uint64_t seed) {
  WorldState w;
  for (std::size_t f = 0; f < config.flows.size(); ++f) {
    w.next_spawn.push_back(config.flows[f].phase);
    w.flow_rng.emplace_back(mix(seed ^ mix(f + 1)));
  }
  return w;
}

WorldState step(WorldState world, const ScenarioConfig& config, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  const double t0 = world.time;
  const double t1 = t0 + dt;
  world.events.clear();

  for (const auto& att : config.attractors) {
    if (att.t_on >= t0 && att.t_on < t1) world.events.push_back({att.t_on, "attractor_on", att.id});
    if (att.t_off >= t0 && att.t_off < t1) world.events.push_back({att.t_off, "attractor_off", att.id});
  }

  for (std::size_t f = 0; f < config.flows.size(); ++f) {
    while (world.next_spawn[f] < t1) {
      spawn_group(world, config, static_cast<int>(f));
      world.next_spawn[f] += config.flows[f].period;
    }
  }

  std::vector<Agent> kept;
  kept.reserve(world.agents.size());
  for (auto& a : world.agents) {
    if (advance(a, config, t1, dt)) {
      kept.push_back(std::move(a));
    } else {
      ++world.exited;
    }
  }
  world.agents = std::move(kept);
  world.time = t1;
  return world;
}

std::vector<Detection> observe(const WorldState& world, const Vec2& robot_pose, const SensorModel& sensor,
                               std::mt19937_64& rng) {
  if (!(sensor.fov_radius > 0.0)) throw std::invalid_argument("observe: fov_radius must be > 0");
  Mat2 chol = Mat2::Zero();
  if (sensor.measurement_noise.squaredNorm() > 0.0) {
    Eigen::LLT<Mat2> llt(sensor.measurement_noise);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("observe: R must be positive definite");
    chol = llt.matrixL();
  }
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Detection> out;
  for (const auto& a : world.agents) {
    if ((a.position - robot_pose).norm() > sensor.fov_radius) continue;
    const Vec2 noise(unit(rng), unit(rng));
    out.push_back({a.id, a.position + chol * noise});
  }
  return out;
}

GroundTruth ground_truth_grid(const WorldState& world, const GridSpec& spec, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("ground_truth_grid: bandwidth must be > 0");
  const auto pos = world.positions();
  if (pos.empty()) return {ProbabilityGrid::uniform(spec), true};
  const auto model = MixtureModel::equal_weight(pos, Mat2::Identity() * bandwidth * bandwidth);
  return {rasterize_normalize(model, spec), false};
}

int agents_near(const WorldState& world, const Vec2& center, double radius) {
  return static_cast<int>(std::count_if(world.agents.begin(), world.agents.end(), [&](const Agent& a) {
    return (a.position - center).norm() < radius;
  }));
}

std::string trajectory_rows(const WorldState& world) {
  std::string out;
  char buf[256];
  for (const auto& a : world.agents) {
    std::snprintf(buf, sizeof(buf), "%.3f,%d,%d,%.6f,%.6f,%.6f,%.6f,%s\n", world.time, a.id, a.flow,
                  a.position.x(), a.position.y(), a.velocity.x(), a.velocity.y(), to_string(a.phase));
    out += buf;
  }
  return out;
}

}  // namespace crowdnav::sim
