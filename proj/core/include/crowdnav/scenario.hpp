#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/gridmap.hpp"
#include "crowdnav/memory.hpp"
#include "crowdnav/planner.hpp"
#include "crowdnav/tracking.hpp"

namespace crowdnav {

struct Wall {
  Vec2 from = Vec2::Zero();
  Vec2 to = Vec2::Zero();
};

struct Gate {
  std::string id;
  Vec2 position = Vec2::Zero();
  double spread = 0.5;  // std of the lateral spawn offset, m
};

struct NormalParam {
  double mean = 0.0;
  double sd = 0.0;
};

/// Groups leave `entry` every `period` seconds (first at `phase`) and walk
/// through `via` to `exit`.
struct Flow {
  std::string id;
  std::string entry;
  std::string exit;
  std::vector<Vec2> via;
  double period = 10.0;
  double phase = 0.0;
  NormalParam group{5.0, 2.0};
  NormalParam speed{1.2, 0.2};
};

/// Pedestrians entering the radius while active walk to a spot near the
/// center, stay `dwell` seconds, then resume their route.
struct Attractor {
  std::string id;
  Vec2 center = Vec2::Zero();
  double radius = 2.0;
  double dwell = 10.0;
  double t_on = 0.0;
  double t_off = 1e12;

  [[nodiscard]] bool active(double t) const { return t >= t_on && t < t_off; }
};

struct TravelTimeModel {
  double half_width = 0.5;        // m
  double v_max = 1.2;             // m/s
  double beta = 0.6931471805599453;  // m^2; density 1 person/m^2 halves the speed

  void validate() const;
};

struct ScenarioConfig {
  std::string name;
  double map_size = 20.0;
  GridSpec grid{20.0, 80};
  double duration = 60.0;
  double dt = 0.1;
  std::uint64_t seed = 1;
  double dwell_spread = 1.0;  // radius of the personal dwell spot around an attractor center

  std::vector<Wall> walls;
  std::vector<Gate> gates;
  std::vector<Flow> flows;
  std::vector<Attractor> attractors;
  std::vector<Obstacle> obstacles;

  Vec2 robot_start = Vec2::Zero();
  Vec2 robot_goal = Vec2::Zero();

  SensorModel sensor;  // R here is the true measurement noise
  /// Measurement covariance assumed by the tracker. Defaults to the true R;
  /// inflating it widens the working-memory components.
  Mat2 filter_measurement_noise = Mat2::Identity() * 0.01;
  Vec2 sensor_pose = Vec2::Zero();

  /// Sensor model as seen by the tracker.
  [[nodiscard]] SensorModel tracker_sensor() const {
    SensorModel s = sensor;
    s.measurement_noise = filter_measurement_noise;
    return s;
  }
  double ground_truth_bandwidth = 0.5;
  FusionConfig fusion;
  PlannerParams planner;
  TravelTimeModel travel;

  double olm_cycle = 10.0;
  double olm_bin_width = 1.0;
  double pum_horizon = 40.0;

  /// Free-form numeric knobs read by the experiment harness.
  std::map<std::string, double> experiment;

  std::string source_text;

  [[nodiscard]] const Gate& gate(const std::string& id) const;
  [[nodiscard]] double experiment_value(const std::string& key, double fallback) const;
  /// FNV-1a 64 of the source text, as 16 hex digits.
  [[nodiscard]] std::string fingerprint() const;
};

/// Raised for malformed scenario documents. The message starts with
/// "line N:" when the offending node is known.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace crowdnav
