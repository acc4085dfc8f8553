#include <gtest/gtest.h>

#include <limits>

#include "crowdnav/tracking.hpp"

using namespace crowdnav;

TEST(Kalman, ZeroNoiseSnapsToMeasurement) {
  SensorModel s;
  s.measurement_noise = Mat2::Identity() * 1e-14;
  auto t = init_track(Vec2(1, 1), s);
  t = kf_step(t, Vec2(2, 3), s);
  EXPECT_NEAR((t.position - Vec2(2, 3)).norm(), 0.0, 1e-9);
}

TEST(Kalman, RecoversConstantVelocity) {
  SensorModel s;
  s.dt = 0.1;
  // Noiseless target: no acceleration, clean measurements, and the filter is told both.
  s.measurement_noise = Mat2::Identity() * 1e-6;
  s.process_noise = Mat4::Zero();
  auto t = init_track(Vec2::Zero(), s);
  for (int k = 1; k <= 50; ++k) t = kf_step(t, Vec2(0.1 * k, 0.0), s);
  EXPECT_LT((t.velocity - Vec2(1, 0)).norm(), 1e-6);
}

TEST(Kalman, CovarianceShrinksWithoutProcessNoise) {
  SensorModel s;
  s.process_noise = Mat4::Zero();
  auto t = init_track(Vec2::Zero(), s);
  double prev = t.covariance.trace();
  for (int k = 1; k <= 100; ++k) {
    t = kf_step(t, Vec2(0.05 * k, 0.02 * k), s);
    EXPECT_LE(t.covariance.trace(), prev + 1e-15);
    prev = t.covariance.trace();
  }
}

TEST(Kalman, NonFiniteStateDiverges) {
  SensorModel s;
  auto t = init_track(Vec2::Zero(), s);
  t.covariance(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(kf_step(t, Vec2::Zero(), s), FilterDivergence);
}

TEST(Kalman, WhiteAccelerationNoiseShape) {
  Mat4 q = SensorModel::white_acceleration_noise(2.0, 0.5);
  EXPECT_NEAR(q(0, 0), 4.0 * 0.5 * 0.5 * 0.5 * 0.5 / 4.0, 1e-15);
  EXPECT_NEAR(q(2, 2), 4.0 * 0.25, 1e-15);
  EXPECT_NEAR(q(0, 2), 4.0 * 0.125 / 2.0, 1e-15);
  EXPECT_EQ(q(0, 1), 0.0);
}

TEST(WorkingMemoryTest, EmptyWhenNoTracks) {
  auto wm = build_working_memory({}, GridSpec(10.0, 10));
  EXPECT_TRUE(wm.empty());
  EXPECT_FALSE(wm.sigma_bar);
}

TEST(WorkingMemoryTest, EqualWeights) {
  std::vector<TrackState> tracks(4);
  for (auto& t : tracks) t.position = Vec2(5, 5);
  auto wm = build_working_memory(tracks, GridSpec(10.0, 10));
  ASSERT_EQ(wm.model.size(), 4u);
  for (const auto& c : wm.model.components()) EXPECT_DOUBLE_EQ(c.weight, 0.25);
}

TEST(WorkingMemoryTest, SigmaBarIsMeanHalfTrace) {
  std::vector<TrackState> tracks(2);
  tracks[0].position = Vec2(2, 2);
  tracks[1].position = Vec2(4, 4);
  tracks[0].covariance.topLeftCorner<2, 2>() = Mat2::Identity() * 0.1;
  tracks[1].covariance.topLeftCorner<2, 2>() = Mat2::Identity() * 0.3;
  auto wm = build_working_memory(tracks, GridSpec(10.0, 10));
  ASSERT_TRUE(wm.sigma_bar);
  EXPECT_NEAR(*wm.sigma_bar, 0.2, 1e-15);
}

TEST(WorkingMemoryTest, DropsTracksOffGrid) {
  std::vector<TrackState> tracks(2);
  tracks[0].position = Vec2(2, 2);
  tracks[1].position = Vec2(40, 4);
  auto wm = build_working_memory(tracks, GridSpec(10.0, 10));
  EXPECT_EQ(wm.model.size(), 1u);
  EXPECT_DOUBLE_EQ(wm.model.components()[0].weight, 1.0);
}

TEST(TrackerTest, LifecycleFollowsDetections) {
  Tracker tr{SensorModel{}};
  std::vector<Detection> d{{1, Vec2(1, 1)}, {2, Vec2(3, 3)}};
  tr.update(d);
  EXPECT_EQ(tr.tracks().size(), 2u);
  std::vector<Detection> d2{{2, Vec2(3.1, 3)}};
  tr.update(d2);
  ASSERT_EQ(tr.by_id().size(), 1u);
  EXPECT_TRUE(tr.by_id().count(2));
}
