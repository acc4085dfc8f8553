#include "crowdnav/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace crowdnav {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  const auto mark = node.Mark();
  if (mark.line >= 0) throw ScenarioError("line " + std::to_string(mark.line + 1) + ": " + message);
  throw ScenarioError(message);
}

double number(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsScalar()) fail(node, what + " must be a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, what + " must be a number");
  }
}

double number_or(const YAML::Node& parent, const char* key, double fallback) {
  const auto node = parent[key];
  return node ? number(node, key) : fallback;
}

Vec2 vec2(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsSequence() || node.size() != 2) fail(node, what + " must be a 2-element list");
  return {number(node[0], what), number(node[1], what)};
}

std::string text(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsScalar()) fail(node, what + " must be a string");
  return node.as<std::string>();
}

YAML::Node require(const YAML::Node& parent, const char* key, const std::string& context) {
  YAML::Node node = parent[key];
  if (!node) fail(parent, context + " is missing '" + key + "'");
  return node;
}

NormalParam normal(const YAML::Node& node, NormalParam fallback, const std::string& what) {
  if (!node) return fallback;
  NormalParam p{number_or(node, "mean", fallback.mean), number_or(node, "sd", fallback.sd)};
  if (!(p.sd >= 0.0)) fail(node, what + ".sd must be >= 0");
  return p;
}

bool on_boundary(const Vec2& p, double size) {
  constexpr double tol = 1e-6;
  const bool inside = p.x() >= -tol && p.y() >= -tol && p.x() <= size + tol && p.y() <= size + tol;
  const bool edge = std::abs(p.x()) <= tol || std::abs(p.y()) <= tol || std::abs(p.x() - size) <= tol ||
                    std::abs(p.y() - size) <= tol;
  return inside && edge;
}

}  // namespace

void TravelTimeModel::validate() const {
  if (!(half_width > 0.0)) throw std::invalid_argument("travel-time corridor half-width must be > 0");
  if (!(v_max > 0.0)) throw std::invalid_argument("travel-time v_max must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("travel-time beta must be >= 0");
}

const Gate& ScenarioConfig::gate(const std::string& id) const {
  for (const auto& g : gates) {
    if (g.id == id) return g;
  }
  throw ScenarioError("unknown gate '" + id + "'");
}

double ScenarioConfig::experiment_value(const std::string& key, double fallback) const {
  const auto it = experiment.find(key);
  return it == experiment.end() ? fallback : it->second;
}

std::string ScenarioConfig::fingerprint() const { return fnv1a_hex(source_text); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScenarioConfig parse_scenario(const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(source);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw ScenarioError("scenario document must be a mapping");

  ScenarioConfig cfg;
  cfg.source_text = source;
  cfg.name = root["name"] ? text(root["name"], "name") : "scenario";
  cfg.map_size = number(require(root, "map_size", "scenario"), "map_size");
  if (!(cfg.map_size > 0.0)) fail(root["map_size"], "map_size must be > 0");
  cfg.duration = number_or(root, "duration", cfg.duration);
  cfg.dt = number_or(root, "dt", cfg.dt);
  if (!(cfg.dt > 0.0)) fail(root["dt"], "dt must be > 0");
  cfg.seed = static_cast<std::uint64_t>(number_or(root, "seed", 1.0));
  cfg.dwell_spread = number_or(root, "dwell_spread", cfg.dwell_spread);

  {
    const auto g = root["grid"];
    const double cell = g ? number_or(g, "cell_size", 0.25) : 0.25;
    int n = static_cast<int>(std::lround(cfg.map_size / cell));
    if (g && g["resolution"]) n = static_cast<int>(number(g["resolution"], "grid.resolution"));
    const Vec2 origin = (g && g["origin"]) ? vec2(g["origin"], "grid.origin") : Vec2::Zero();
    try {
      cfg.grid = GridSpec(cfg.map_size, n, origin);
    } catch (const std::invalid_argument& e) {
      fail(g ? g : root, e.what());
    }
  }

  for (const auto& w : root["walls"]) {
    cfg.walls.push_back({vec2(require(w, "from", "wall"), "wall.from"), vec2(require(w, "to", "wall"), "wall.to")});
  }

  for (const auto& g : root["gates"]) {
    Gate gate;
    gate.id = text(require(g, "id", "gate"), "gate.id");
    gate.position = vec2(require(g, "position", "gate '" + gate.id + "'"), "gate.position");
    gate.spread = number_or(g, "spread", gate.spread);
    if (!on_boundary(gate.position, cfg.map_size)) fail(g, "gate '" + gate.id + "' must lie on the map boundary");
    for (const auto& other : cfg.gates) {
      if (other.id == gate.id) fail(g, "duplicate gate id '" + gate.id + "'");
    }
    cfg.gates.push_back(gate);
  }

  for (const auto& f : root["flows"]) {
    Flow flow;
    flow.id = f["id"] ? text(f["id"], "flow.id") : "flow" + std::to_string(cfg.flows.size());
    const std::string ctx = "flow '" + flow.id + "'";
    flow.entry = text(require(f, "entry", ctx), ctx + ".entry");
    flow.exit = text(require(f, "exit", ctx), ctx + ".exit");
    for (const auto* gate_id : {&flow.entry, &flow.exit}) {
      bool known = false;
      for (const auto& g : cfg.gates) known = known || g.id == *gate_id;
      if (!known) fail(f, ctx + " references unknown gate '" + *gate_id + "'");
    }
    for (const auto& v : f["via"]) flow.via.push_back(vec2(v, ctx + ".via"));
    flow.period = number(require(f, "period", ctx), ctx + ".period");
    if (!(flow.period > 0.0)) fail(f["period"], ctx + " period must be > 0");
    flow.phase = number_or(f, "phase", 0.0);
    flow.group = normal(f["group"], flow.group, ctx + ".group");
    flow.speed = normal(f["speed"], flow.speed, ctx + ".speed");
    if (!(flow.group.mean > 0.0)) fail(f["group"], ctx + " group mean must be > 0");
    if (!(flow.speed.mean > 0.0)) fail(f["speed"], ctx + " speed mean must be > 0");
    cfg.flows.push_back(std::move(flow));
  }

  for (const auto& a : root["attractors"]) {
    Attractor att;
    att.id = a["id"] ? text(a["id"], "attractor.id") : "A" + std::to_string(cfg.attractors.size());
    att.center = vec2(require(a, "center", "attractor"), "attractor.center");
    att.radius = number(require(a, "radius", "attractor"), "attractor.radius");
    att.dwell = number_or(a, "dwell", att.dwell);
    if (!(att.radius > 0.0)) fail(a, "attractor '" + att.id + "' radius must be > 0");
    if (!(att.dwell >= 0.0)) fail(a, "attractor '" + att.id + "' dwell must be >= 0");
    if (a["active"]) {
      const Vec2 on_off = vec2(a["active"], "attractor.active");
      att.t_on = on_off.x();
      att.t_off = on_off.y();
      if (!(att.t_off > att.t_on)) fail(a["active"], "attractor '" + att.id + "' active interval is empty");
    }
    cfg.attractors.push_back(att);
  }

  for (const auto& o : root["obstacles"]) {
    Obstacle obs{vec2(require(o, "center", "obstacle"), "obstacle.center"),
                 number(require(o, "radius", "obstacle"), "obstacle.radius")};
    if (!(obs.radius > 0.0)) fail(o, "obstacle radius must be > 0");
    cfg.obstacles.push_back(obs);
  }

  if (const auto r = root["robot"]) {
    cfg.robot_start = vec2(require(r, "start", "robot"), "robot.start");
    cfg.robot_goal = vec2(require(r, "goal", "robot"), "robot.goal");
  }

  {
    const auto s = root["sensor"];
    cfg.sensor_pose = (s && s["pose"]) ? vec2(s["pose"], "sensor.pose") : Vec2::Constant(cfg.map_size / 2.0);
    cfg.sensor.fov_radius = s ? number_or(s, "fov_radius", cfg.map_size) : cfg.map_size;
    cfg.sensor.dt = s ? number_or(s, "dt", cfg.dt) : cfg.dt;
    const double noise_sd = s ? number_or(s, "noise_sd", 0.1) : 0.1;
    const double accel_sd = s ? number_or(s, "accel_sd", 0.5) : 0.5;
    const double filter_sd = s ? number_or(s, "filter_noise_sd", noise_sd) : noise_sd;
    if (!(filter_sd > 0.0)) fail(s, "sensor.filter_noise_sd must be > 0");
    cfg.sensor.measurement_noise = Mat2::Identity() * noise_sd * noise_sd;
    cfg.filter_measurement_noise = Mat2::Identity() * filter_sd * filter_sd;
    cfg.sensor.process_noise = SensorModel::white_acceleration_noise(accel_sd, cfg.sensor.dt);
    try {
      cfg.sensor.validate();
    } catch (const std::invalid_argument& e) {
      fail(s, e.what());
    }
  }

  if (const auto g = root["ground_truth"]) cfg.ground_truth_bandwidth = number_or(g, "bandwidth", 0.5);
  if (!(cfg.ground_truth_bandwidth > 0.0)) fail(root["ground_truth"], "ground-truth bandwidth must be > 0");

  if (const auto f = root["fusion"]) cfg.fusion.gamma = number_or(f, "gamma", cfg.fusion.gamma);
  try {
    cfg.fusion.validate();
  } catch (const std::invalid_argument& e) {
    fail(root["fusion"], e.what());
  }

  {
    const auto p = root["planner"];
    const int n = p ? static_cast<int>(number_or(p, "waypoints", 5)) : 5;
    const double lookahead = p ? number_or(p, "lookahead", 4.0) : 4.0;
    cfg.planner = PlannerParams::with_lookahead(lookahead, n);
    if (p) {
      cfg.planner.spacing = number_or(p, "spacing", cfg.planner.spacing);
      cfg.planner.shrink_distance = number_or(p, "shrink_distance", cfg.planner.shrink_distance);
      cfg.planner.goal_radius = number_or(p, "goal_radius", cfg.planner.goal_radius);
      cfg.planner.safety_margin = number_or(p, "safety_margin", cfg.planner.safety_margin);
      cfg.planner.alpha = number_or(p, "alpha", cfg.planner.alpha);
      cfg.planner.restarts = static_cast<int>(number_or(p, "restarts", cfg.planner.restarts));
      if (p["bounds"] && p["bounds"].as<bool>(false)) {
        cfg.planner.bounds = Bounds{cfg.grid.origin, cfg.grid.origin + Vec2::Constant(cfg.map_size)};
      }
    }
    try {
      cfg.planner.validate();
    } catch (const std::invalid_argument& e) {
      fail(p ? p : root, e.what());
    }
  }

  if (const auto t = root["travel_time"]) {
    cfg.travel.half_width = number_or(t, "half_width", cfg.travel.half_width);
    cfg.travel.v_max = number_or(t, "v_max", cfg.travel.v_max);
    cfg.travel.beta = number_or(t, "beta", cfg.travel.beta);
    try {
      cfg.travel.validate();
    } catch (const std::invalid_argument& e) {
      fail(t, e.what());
    }
  }

  if (const auto o = root["olm"]) {
    cfg.olm_cycle = number_or(o, "cycle", cfg.olm_cycle);
    cfg.olm_bin_width = number_or(o, "bin_width", cfg.olm_bin_width);
    if (!(cfg.olm_cycle > 0.0) || !(cfg.olm_bin_width > 0.0)) fail(o, "olm cycle and bin_width must be > 0");
  }
  if (const auto p = root["pum"]) {
    cfg.pum_horizon = number_or(p, "horizon", cfg.pum_horizon);
    if (!(cfg.pum_horizon > 0.0)) fail(p, "pum horizon must be > 0");
  }

  if (const auto e = root["experiment"]) {
    if (!e.IsMap()) fail(e, "experiment must be a mapping of numbers");
    for (const auto& kv : e) {
      const auto key = kv.first.as<std::string>();
      cfg.experiment[key] = number(kv.second, "experiment." + key);
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace crowdnav
