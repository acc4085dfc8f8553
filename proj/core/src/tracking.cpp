#include "crowdnav/tracking.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace crowdnav {

namespace {

bool is_spd(const Mat4& m) {
  if (!m.allFinite()) return false;
  Eigen::LLT<Mat4> llt(m);
  return llt.info() == Eigen::Success;
}

Mat4 transition(double dt) {
  Mat4 a = Mat4::Identity();
  a(0, 2) = dt;
  a(1, 3) = dt;
  return a;
}

}  // namespace

Mat4 SensorModel::white_acceleration_noise(double sigma_a, double dt) {
  const double q = sigma_a * sigma_a;
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  const double dt4 = dt3 * dt;
  Mat4 out = Mat4::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    out(axis, axis) = q * dt4 / 4.0;
    out(axis, axis + 2) = q * dt3 / 2.0;
    out(axis + 2, axis) = q * dt3 / 2.0;
    out(axis + 2, axis + 2) = q * dt2;
  }
  return out;
}

void SensorModel::validate() const {
  if (!(fov_radius > 0.0)) throw std::invalid_argument("sensor fov_radius must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("sensor dt must be > 0");
}

TrackState init_track(const Vec2& measurement, const SensorModel& sensor, double velocity_variance) {
  TrackState t;
  t.position = measurement;
  t.velocity = Vec2::Zero();
  t.covariance = Mat4::Zero();
  t.covariance.topLeftCorner<2, 2>() = sensor.measurement_noise;
  t.covariance.bottomRightCorner<2, 2>() = Mat2::Identity() * velocity_variance;
  return t;
}

TrackState kf_step(const TrackState& track, const Vec2& measurement, const SensorModel& sensor) {
  if (!measurement.allFinite()) throw std::invalid_argument("kf_step: measurement must be finite");
  const Mat4 A = transition(sensor.dt);

  Eigen::Vector4d x;
  x << track.position, track.velocity;
  const Eigen::Vector4d x_pred = A * x;
  Mat4 p_pred = A * track.covariance * A.transpose() + sensor.process_noise;
  p_pred = 0.5 * (p_pred + p_pred.transpose()).eval();

  // H selects position, so H P H' and P H' are plain blocks.
  const Mat2 s = p_pred.topLeftCorner<2, 2>() + sensor.measurement_noise;
  const Eigen::Matrix<double, 4, 2> pht = p_pred.leftCols<2>();
  const Eigen::Matrix<double, 4, 2> gain = pht * s.inverse();
  const Vec2 innovation = measurement - x_pred.head<2>();
  const Eigen::Vector4d x_post = x_pred + gain * innovation;

  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Mat4 ikh = Mat4::Identity() - gain * h;
  Mat4 p_post = ikh * p_pred * ikh.transpose() + gain * sensor.measurement_noise * gain.transpose();
  p_post = 0.5 * (p_post + p_post.transpose()).eval();

  if (!x_post.allFinite() || !is_spd(p_post)) throw FilterDivergence();

  TrackState out;
  out.position = x_post.head<2>();
  out.velocity = x_post.tail<2>();
  out.covariance = p_post;
  return out;
}

WorkingMemory build_working_memory(std::span<const TrackState> tracks, const GridSpec& spec) {
  std::vector<const TrackState*> inside;
  for (const auto& t : tracks) {
    if (spec.contains(t.position)) inside.push_back(&t);
  }
  WorkingMemory wm;
  if (inside.empty()) return wm;

  const double w = 1.0 / static_cast<double>(inside.size());
  std::vector<GaussianComponent> comps;
  comps.reserve(inside.size());
  double half_trace_sum = 0.0;
  for (const TrackState* t : inside) {
    Mat2 cov = t->position_covariance();
    cov = 0.5 * (cov + cov.transpose()).eval();
    comps.push_back({t->position, cov, w});
    half_trace_sum += 0.5 * cov.trace();
  }
  wm.model = MixtureModel(std::move(comps));
  wm.sigma_bar = half_trace_sum / static_cast<double>(inside.size());
  return wm;
}

Tracker::Tracker(SensorModel sensor, double initial_velocity_variance)
    : sensor_(std::move(sensor)), initial_velocity_variance_(initial_velocity_variance) {
  sensor_.validate();
}

void Tracker::update(std::span<const Detection> detections) {
  std::map<int, TrackState> next;
  for (const auto& d : detections) {
    auto it = tracks_.find(d.id);
    if (it == tracks_.end()) {
      next.emplace(d.id, init_track(d.position, sensor_, initial_velocity_variance_));
    } else {
      next.emplace(d.id, kf_step(it->second, d.position, sensor_));
    }
  }
  tracks_ = std::move(next);
}

std::vector<TrackState> Tracker::tracks() const {
  std::vector<TrackState> out;
  out.reserve(tracks_.size());
  for (const auto& [id, t] : tracks_) out.push_back(t);
  return out;
}

}  // namespace crowdnav
