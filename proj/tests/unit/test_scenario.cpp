#include <gtest/gtest.h>

#include <string>

#include "crowdnav/scenario.hpp"

using namespace crowdnav;

namespace {

const char* kMinimal = R"(name: mini
map_size: 10
gates:
  - {id: A, position: [0, 5]}
  - {id: B, position: [10, 5]}
flows:
  - {id: ab, entry: A, exit: B, period: 4}
)";

}  // namespace

TEST(Scenario, ParsesMinimalWithDefaults) {
  auto cfg = parse_scenario(kMinimal);
  EXPECT_EQ(cfg.name, "mini");
  EXPECT_EQ(cfg.grid.resolution, 40);
  ASSERT_EQ(cfg.flows.size(), 1u);
  EXPECT_DOUBLE_EQ(cfg.flows[0].group.mean, 5.0);
  EXPECT_DOUBLE_EQ(cfg.flows[0].speed.mean, 1.2);
  EXPECT_DOUBLE_EQ(cfg.flows[0].speed.sd, 0.2);
  EXPECT_DOUBLE_EQ(cfg.ground_truth_bandwidth, 0.5);
  EXPECT_DOUBLE_EQ(cfg.travel.v_max, 1.2);
  EXPECT_EQ(cfg.planner.waypoints, 5);
  EXPECT_DOUBLE_EQ(cfg.planner.spacing, 0.8);
  EXPECT_TRUE(cfg.filter_measurement_noise.isApprox(cfg.sensor.measurement_noise));
}

TEST(Scenario, UnknownGateNamesFlowAndLine) {
  std::string text = kMinimal;
  text.replace(text.find("exit: B"), 7, "exit: Q");
  try {
    parse_scenario(text);
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    const std::string msg = e.what();
    EXPECT_EQ(msg.rfind("line 7:", 0), 0u) << msg;
    EXPECT_NE(msg.find("flow 'ab'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'Q'"), std::string::npos) << msg;
  }
}

TEST(Scenario, RejectsInvalidValues) {
  EXPECT_THROW(parse_scenario("map_size: -1\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("name: x\n"), ScenarioError);
  std::string bad_period = kMinimal;
  bad_period.replace(bad_period.find("period: 4"), 9, "period: 0");
  EXPECT_THROW(parse_scenario(bad_period), ScenarioError);
  std::string off_edge = kMinimal;
  off_edge.replace(off_edge.find("[0, 5]"), 6, "[3, 5]");
  EXPECT_THROW(parse_scenario(off_edge), ScenarioError);
  EXPECT_THROW(parse_scenario("map_size: [1, 2\n"), ScenarioError);
}

TEST(Scenario, FingerprintTracksSource) {
  auto a = parse_scenario(kMinimal);
  auto b = parse_scenario(std::string(kMinimal) + "seed: 4\n");
  EXPECT_EQ(a.fingerprint().size(), 16u);
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), parse_scenario(kMinimal).fingerprint());
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Scenario, BundledFilesLoad) {
  for (const char* name : {"case1_corridor.yaml", "case2_random.yaml", "case3_plaza.yaml"}) {
    EXPECT_NO_THROW(load_scenario(std::string(CROWDNAV_SCENARIO_DIR) + "/" + name)) << name;
  }
}

TEST(TravelModel, Validation) {
  TravelTimeModel m;
  EXPECT_NO_THROW(m.validate());
  m.half_width = 0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}
