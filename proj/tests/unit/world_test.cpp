#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "valet/errors.hpp"
#include "valet/world.hpp"

namespace valet {
namespace {

std::string minimal_world(const std::string& glare = "[]", bool with_lanes = true) {
  std::string doc = "{";
  if (with_lanes) doc += R"("lanes": [{"min": [-1, -1], "max": [4, 1]}],)";
  doc += R"(
    "bays": [{"center": [1.0, 1.5], "heading_deg": 90, "depth": 0.55, "width": 0.32}],
    "arrows": [],
    "scale_line": {"a": [0.0, 0.5], "b": [0.0, 0.8]},
    "glare_spots": )" + glare + R"(,
    "floor_albedo": 0.3,
    "marking_albedo": 0.8,
    "start_pose": {"x": 0, "z": 0, "heading_deg": 0},
    "vehicle": {"wheelbase": 0.24, "width": 0.2, "length": 0.36, "steer_max_deg": 30, "cruise_speed": 0.3},
    "model_scale": 0.1
  })";
  return doc;
}

TEST(WorldLoadTest, MinimalDocumentParses) {
  const WorldSpec w = load_world(minimal_world());
  ASSERT_EQ(w.bays.size(), 1u);
  EXPECT_FALSE(w.bays[0].occupied);
  EXPECT_EQ(w.lanes.size(), 1u);
  EXPECT_NEAR(w.bays[0].rect.heading, kPi / 2, 1e-12);
}

TEST(WorldLoadTest, MissingLanesIsNamed) {
  try {
    load_world(minimal_world("[]", false));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lanes"), std::string::npos) << e.what();
  }
}

TEST(WorldLoadTest, GlareIntensityOutOfRange) {
  const std::string glare = R"([{"center": [0, 0], "radius": 0.1, "intensity": 1.5}])";
  EXPECT_THROW(load_world(minimal_world(glare)), ConfigError);
}

TEST(WorldLoadTest, MalformedJson) {
  EXPECT_THROW(load_world("{\"lanes\": ["), ConfigError);
}

TEST(VehicleStepTest, StraightForward) {
  VehicleParams p;
  VehicleState s;
  s.speed = 1.0;
  const VehicleState n = step_vehicle(s, p, 1.0);
  EXPECT_NEAR(n.x, 1.0, 1e-12);
  EXPECT_NEAR(n.z, 0.0, 1e-12);
  EXPECT_NEAR(n.heading, 0.0, 1e-12);
}

TEST(VehicleStepTest, ReverseRetreats) {
  VehicleParams p;
  VehicleState s;
  s.heading = 0.3;
  s.speed = 0.5;
  s.gear = Gear::Reverse;
  const VehicleState n = step_vehicle(s, p, 2.0);
  EXPECT_NEAR(n.x, -std::cos(0.3), 1e-12);
  EXPECT_NEAR(n.z, -std::sin(0.3), 1e-12);
  EXPECT_NEAR(n.heading, 0.3, 1e-12);
}

TEST(VehicleStepTest, ConstantSteerTracesCircle) {
  VehicleParams p;
  const double steer = 0.35;
  const double radius = p.wheelbase / std::tan(steer);
  VehicleState s;
  s.steer = steer;
  s.speed = 0.3;
  const double period = 2.0 * kPi * radius / s.speed;
  const int n = 997;
  const Vec2 centre{0.0, radius};
  VehicleState cur = s;
  for (int i = 0; i < n; ++i) {
    cur = step_vehicle(cur, p, period / n);
    EXPECT_NEAR(distance({cur.x, cur.z}, centre), radius, 1e-3 * radius);
  }
  EXPECT_NEAR(cur.x, 0.0, 1e-6);
  EXPECT_NEAR(cur.z, 0.0, 1e-6);
  EXPECT_NEAR(normalize_angle(cur.heading), 0.0, 1e-6);
}

WorldSpec blank_world() {
  WorldSpec w;
  w.lanes.push_back({{-2, -2}, {2, 2}});
  w.scale_line = {{10, 10}, {10, 10.3}};
  w.floor_albedo = 0.4;
  return w;
}

TEST(RenderGroundTest, UniformFloor) {
  WorldSpec w = blank_world();
  const GrayImage img = render_ground(w, {0, 0}, 1.0, 1.0, 0.01);
  for (auto v : img.pixels()) ASSERT_EQ(v, to_level(0.4));
}

TEST(RenderGroundTest, StripeMatchesPointInRect) {
  WorldSpec w = blank_world();
  // A 0.05 m wide scale line running along z at x = 0.105.
  w.scale_line = {{0.105, -0.3}, {0.105, 0.3}};
  w.line_width = 0.05;
  const GrayImage img = render_ground(w, {0, 0}, 1.0, 1.0, 0.01);
  const int row = 50;
  int bright = 0;
  for (int c = 0; c < img.width(); ++c) {
    const double x = -0.5 + (c + 0.5) * 0.01;
    const bool inside = std::abs(x - 0.105) <= 0.025;
    EXPECT_EQ(img.at(c, row), inside ? to_level(0.8) : to_level(0.4)) << "col " << c;
    bright += inside;
  }
  EXPECT_EQ(bright, 5);
}

TEST(RenderGroundTest, GlareAddsToFloor) {
  WorldSpec w = blank_world();
  w.glare_spots.push_back({{0, 0}, 0.1, 0.3});
  const GroundModel g(w);
  EXPECT_NEAR(g.intensity({0.05, 0.02}), 0.7, 1e-12);
  EXPECT_NEAR(g.intensity({0.2, 0.0}), 0.4, 1e-12);
}

TEST(BayClearanceTest, CentredVehicleIsSymmetric) {
  VehicleParams p;
  const OrientedRect bay{{1.0, 2.0}, kPi / 2, 0.55, 0.32};
  // Rear axle sits wheelbase/2 behind the footprint centre.
  VehicleState s;
  s.heading = kPi / 2;
  s.x = 1.0;
  s.z = 2.0 - 0.5 * p.wheelbase;
  const Vec2 c = vehicle_center(s.pose(), p);
  ASSERT_NEAR(c.x, 1.0, 1e-12);
  ASSERT_NEAR(c.z, 2.0, 1e-12);
  EXPECT_NEAR(bay_clearance(s, p, bay), std::min((0.32 - p.width) / 2, (0.55 - p.length) / 2),
              1e-12);
}

TEST(BayClearanceTest, StraddlingSplitLineIsNegative) {
  VehicleParams p;
  const OrientedRect bay{{1.0, 2.0}, kPi / 2, 0.55, 0.32};
  VehicleState s;
  s.heading = kPi / 2;
  s.x = 1.0 + 0.16;
  s.z = 2.0 - 0.5 * p.wheelbase;
  EXPECT_LT(bay_clearance(s, p, bay), 0.0);
}

TEST(BayClearanceTest, InvariantUnderRigidMotion) {
  VehicleParams p;
  const OrientedRect bay{{1.0, 2.0}, 0.4, 0.6, 0.35};
  VehicleState s;
  s.x = 0.95;
  s.z = 1.98;
  s.heading = 0.5;
  const double ref = bay_clearance(s, p, bay);
  const Pose2 motion{-3.0, 0.7, 1.1};
  auto move = [&](Vec2 q) { return to_world(motion, q); };
  OrientedRect bay2 = bay;
  bay2.center = move(bay.center);
  bay2.heading += motion.heading;
  VehicleState s2 = s;
  const Vec2 q = move({s.x, s.z});
  s2.x = q.x;
  s2.z = q.z;
  s2.heading += motion.heading;
  EXPECT_NEAR(bay_clearance(s2, p, bay2), ref, 1e-9);
}

}  // namespace
}  // namespace valet
