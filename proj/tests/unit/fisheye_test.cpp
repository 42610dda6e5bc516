#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "valet/errors.hpp"
#include "valet/fisheye.hpp"

namespace valet {
namespace {

FisheyeIntrinsics intrinsics() {
  FisheyeIntrinsics k;
  k.width = 800;
  k.height = 800;
  k.cx = 400.0;
  k.cy = 400.0;
  k.focal = 400.0 / (0.5 * kPi);
  return k;
}

// Level camera at the origin looking along vehicle +x.
CameraBasis level_basis() { return camera_basis({0.0, 0.0, 0.5, 0.0, 0.0}); }

TEST(FisheyeProjectTest, OpticalAxisHitsPrincipalPoint) {
  const auto px = project_point(intrinsics(), level_basis(), {3.0, 0.0, 0.5});
  ASSERT_TRUE(px);
  EXPECT_EQ(px->u, 400.0);
  EXPECT_EQ(px->v, 400.0);
}

TEST(FisheyeProjectTest, FortyFiveDegreesOnEachAzimuth) {
  const FisheyeIntrinsics k = intrinsics();
  const CameraBasis cam = level_basis();
  for (int i = 0; i < 12; ++i) {
    const double az = i * kPi / 6;
    // Camera frame (right, down, axis) = (cos az, sin az, 1) is 45 degrees off-axis.
    const Vec3 dir{1.0, -std::cos(az), -std::sin(az)};
    const auto px = project_point(k, cam, {dir.x, dir.y, 0.5 + dir.z});
    ASSERT_TRUE(px);
    const double r = k.focal * kPi / 4;
    EXPECT_NEAR(px->u, k.cx + r * std::cos(az), 1e-9);
    EXPECT_NEAR(px->v, k.cy + r * std::sin(az), 1e-9);
  }
}

TEST(FisheyeProjectTest, RimAndBehindCamera) {
  const FisheyeIntrinsics k = intrinsics();
  const CameraBasis cam = level_basis();
  const auto rim = project_point(k, cam, {0.0, -1.0, 0.5});
  ASSERT_TRUE(rim);
  EXPECT_NEAR(std::hypot(rim->u - k.cx, rim->v - k.cy), k.focal * kPi / 2, 1e-9);
  const double t = deg2rad(91.0);
  EXPECT_FALSE(project_point(k, cam, {std::cos(t), -std::sin(t), 0.5}));
}

TEST(FisheyeProjectTest, PolarAngleMatchesAtan2) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 20000; ++i) {
    const double rho = std::abs(u(rng));
    const double z = u(rng);
    EXPECT_NEAR(polar_angle(rho, z), std::atan2(rho, z), 1e-11);
  }
}

TEST(FisheyeProjectTest, RoundTripThroughUnproject) {
  const FisheyeIntrinsics k = intrinsics();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ang(0.0, 0.5 * kPi - 1e-3);
  std::uniform_real_distribution<double> az(-kPi, kPi);
  const CameraBasis id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 0}};
  for (int i = 0; i < 2000; ++i) {
    const double th = ang(rng);
    const double a = az(rng);
    const Vec3 ray{std::sin(th) * std::cos(a), std::sin(th) * std::sin(a), std::cos(th)};
    const auto px = project_point(k, id, ray);
    ASSERT_TRUE(px);
    const auto back = unproject(k, *px);
    ASSERT_TRUE(back);
    EXPECT_NEAR(back->x, ray.x, 1e-9);
    EXPECT_NEAR(back->y, ray.y, 1e-9);
    EXPECT_NEAR(back->z, ray.z, 1e-9);
  }
}

TEST(FisheyeProjectTest, RadiusMonotoneInAngle) {
  const FisheyeIntrinsics k = intrinsics();
  const CameraBasis cam = level_basis();
  double last = -1.0;
  for (int i = 0; i <= 90; ++i) {
    const double t = deg2rad(i);
    const auto px = project_point(k, cam, {std::cos(t), -std::sin(t), 0.5});
    ASSERT_TRUE(px);
    const double r = std::hypot(px->u - k.cx, px->v - k.cy);
    EXPECT_GT(r, last);
    last = r;
  }
}

TEST(FisheyeIntrinsicsTest, FovMustFit) {
  FisheyeIntrinsics k = intrinsics();
  EXPECT_NO_THROW(k.validate());
  k.focal *= 1.1;
  EXPECT_THROW(k.validate(), PreconditionError);
}

WorldSpec uniform_world() {
  WorldSpec w;
  w.lanes.push_back({{-5, -5}, {5, 5}});
  w.scale_line = {{50, 50}, {50, 50.3}};
  w.floor_albedo = 0.4;
  return w;
}

TEST(FisheyeRenderTest, UniformWorldGivesFloorOnGround) {
  const GroundModel g(uniform_world());
  const FisheyeCamera cam{intrinsics(), {0.2, 0.0, 0.3, 0.0, deg2rad(30.0)}};
  const GrayImage img = render_fisheye_view(g, cam, {0, 0, 0});
  const CameraBasis b = camera_basis(cam.extrinsic);
  for (int r = 0; r < img.height(); r += 7) {
    for (int c = 0; c < img.width(); c += 7) {
      const bool hit = fisheye_pixel_ground_hit(cam.intrinsics, b, {c + 0.5, r + 0.5}).has_value();
      EXPECT_EQ(img.at(c, r), hit ? to_level(0.4) : 0);
    }
  }
}

TEST(FisheyeRenderTest, LevelCameraSkyIsBlack) {
  const GroundModel g(uniform_world());
  const FisheyeCamera cam{intrinsics(), {0.0, 0.0, 0.3, 0.0, 0.0}};
  const GrayImage img = render_fisheye_view(g, cam, {0, 0, 0});
  // Image row v < cy looks above the horizon for a level camera.
  for (int r = 0; r < 400; r += 5) {
    for (int c = 0; c < img.width(); c += 5) ASSERT_EQ(img.at(c, r), 0);
  }
}

TEST(FisheyeRenderTest, MarkingCornerLandsOnProjection) {
  WorldSpec w = uniform_world();
  Bay bay;
  bay.rect = {{1.0, 0.0}, 0.0, 0.4, 0.4};
  bay.occupied = true;  // obstacle block 0.28 x 0.28
  w.bays.push_back(bay);
  const GroundModel g(w);
  const FisheyeCamera cam{intrinsics(), {0.0, 0.0, 0.3, 0.0, deg2rad(30.0)}};
  const GrayImage img = render_fisheye_view(g, cam, {0, 0, 0});
  const Vec2 corner{1.0 - 0.14, 0.14};
  const auto px = project_ground_to_fisheye(cam.intrinsics, cam.extrinsic, corner);
  ASSERT_TRUE(px);
  // The 3x3 pixels around the projected corner hold both block and floor.
  bool block = false, floor = false;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const auto v = img.at(static_cast<int>(px->u) + dc, static_cast<int>(px->v) + dr);
      block = block || v == to_level(w.obstacle_albedo);
      floor = floor || v == to_level(0.4);
    }
  }
  EXPECT_TRUE(block);
  EXPECT_TRUE(floor);
}

TEST(FisheyeRenderTest, LazyViewMatchesFullRender) {
  WorldSpec w = uniform_world();
  w.glare_spots.push_back({{0.8, 0.1}, 0.2, 0.3});
  const GroundModel g(w);
  const CameraRig rig = default_rig(w.vehicle);
  const Pose2 pose{0.3, -0.2, 0.4};
  const auto& cam = rig.cameras[static_cast<int>(CameraId::Left)];
  const GrayImage full = render_fisheye_view(g, cam, pose);
  LazyFisheyeView lazy(g, cam);
  lazy.reset(pose);
  for (int r = 0; r < full.height(); r += 3) {
    for (int c = 0; c < full.width(); c += 3) ASSERT_EQ(lazy.at(c, r), full.at(c, r));
  }
}

}  // namespace
}  // namespace valet
