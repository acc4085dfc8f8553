#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "crowdnav/gridmap.hpp"

namespace crowdnav {

using Mat4 = Eigen::Matrix4d;

/// Constant-velocity pedestrian state, stacked as [x, y, vx, vy].
struct TrackState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Mat4 covariance = Mat4::Identity();

  [[nodiscard]] Mat2 position_covariance() const { return covariance.topLeftCorner<2, 2>(); }
};

struct SensorModel {
  Mat2 measurement_noise = Mat2::Identity() * 0.01;  // R, m^2
  Mat4 process_noise = Mat4::Identity() * 1e-4;      // Q
  double fov_radius = 10.0;                           // m
  double dt = 0.1;                                    // s

  /// Q for a piecewise-constant white acceleration of std `sigma_a` (m/s^2).
  static Mat4 white_acceleration_noise(double sigma_a, double dt);
  void validate() const;
};

class FilterDivergence : public std::runtime_error {
 public:
  FilterDivergence() : std::runtime_error("filter divergence") {}
};

/// Track seeded at a first detection: position = measurement, zero velocity.
TrackState init_track(const Vec2& measurement, const SensorModel& sensor, double velocity_variance = 1.0);

/// One predict (constant velocity, Q) + update (position-only, R) cycle.
TrackState kf_step(const TrackState& track, const Vec2& measurement, const SensorModel& sensor);

struct WorkingMemory {
  MixtureModel model;
  /// Mean half-trace of the position covariances; empty when there are no tracks.
  std::optional<double> sigma_bar;

  [[nodiscard]] bool empty() const { return model.empty(); }
};

/// Equal-weight mixture over track positions. Tracks whose position lies
/// outside `spec` are left out.
WorkingMemory build_working_memory(std::span<const TrackState> tracks, const GridSpec& spec);

struct Detection {
  int id = 0;
  Vec2 position = Vec2::Zero();
};

/// Identity-associated multi-target tracker. A track lives while its
/// pedestrian keeps being detected; missing ids are dropped.
class Tracker {
 public:
  explicit Tracker(SensorModel sensor, double initial_velocity_variance = 1.0);

  void update(std::span<const Detection> detections);
  [[nodiscard]] std::vector<TrackState> tracks() const;
  [[nodiscard]] const std::map<int, TrackState>& by_id() const { return tracks_; }
  [[nodiscard]] const SensorModel& sensor() const { return sensor_; }

 private:
  SensorModel sensor_;
  double initial_velocity_variance_;
  std::map<int, TrackState> tracks_;
};

}  // namespace crowdnav
