#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "valet/avm.hpp"
#include "valet/errors.hpp"

namespace valet {
namespace {

CameraRig rig() { return default_rig(VehicleParams{}); }

AvmSpec small_spec() {
  AvmSpec s;
  s.extent_forward = 2.0;
  s.extent_lateral = 1.6;
  s.resolution = 0.01;
  return s;
}

WorldSpec textured_world() {
  WorldSpec w;
  w.lanes.push_back({{-5, -5}, {5, 5}});
  w.scale_line = {{-0.6, 0.3}, {-0.6, 0.6}};
  for (int i = 0; i < 4; ++i) {
    Bay b;
    b.rect = {{-0.3 + 0.32 * i, 0.55}, kPi / 2, 0.55, 0.32};
    b.occupied = i == 2;
    w.bays.push_back(b);
  }
  w.arrows.push_back({{0.7, -0.4}, 0.0, ArrowDirection::Right});
  w.glare_spots.push_back({{-0.4, -0.5}, 0.2, 0.3});
  return w;
}

std::vector<GrayImage> views(const WorldSpec& w, const CameraRig& r, const Pose2& pose) {
  const GroundModel g(w);
  std::vector<GrayImage> out;
  for (const auto& cam : r.cameras) out.push_back(render_fisheye_view(g, cam, pose));
  return out;
}

// Independent mapping: pixel centre to vehicle frame, nearest optical-axis
// azimuth by angular difference, then forward projection.
struct Oracle {
  bool valid = false;
  bool tie = false;
  int camera = -1;
  double u = 0.0, v = 0.0;
};

Oracle oracle(const CameraRig& r, const AvmSpec& s, int col, int row) {
  const int w = static_cast<int>(std::lround(s.extent_lateral / s.resolution));
  const int h = static_cast<int>(std::lround(s.extent_forward / s.resolution));
  const double fwd = (h / 2.0 - row - 0.5) * s.resolution;
  const double left = (w / 2.0 - col - 0.5) * s.resolution;
  Oracle o;
  if (std::abs(fwd) <= 0.5 * r.body_length && std::abs(left) <= 0.5 * r.body_width) return o;
  const double az = std::atan2(left, fwd);
  double best = 1e9, second = 1e9;
  for (int i = 0; i < kCameraCount; ++i) {
    const double d = std::abs(normalize_angle(az - r.cameras[i].extrinsic.yaw));
    if (d < best) {
      second = best;
      best = d;
      o.camera = i;
    } else if (d < second) {
      second = d;
    }
  }
  o.tie = second - best < 1e-9;
  const auto& cam = r.cameras[o.camera];
  const auto px = project_ground_to_fisheye(cam.intrinsics, cam.extrinsic, {fwd, left});
  if (!px || px->u < 0 || px->v < 0 || px->u >= cam.intrinsics.width || px->v >= cam.intrinsics.height) {
    return o;
  }
  o.valid = true;
  o.u = px->u;
  o.v = px->v;
  return o;
}

TEST(AvmSpecTest, PixelCentreRoundTrip) {
  const AvmSpec s;
  EXPECT_EQ(s.width(), 600);
  EXPECT_EQ(s.height(), 600);
  const Vec2 p = s.pixel_to_vehicle(10, 20);
  const PixelCoord px = s.vehicle_to_pixel(p);
  EXPECT_NEAR(px.u, 10.5, 1e-9);
  EXPECT_NEAR(px.v, 20.5, 1e-9);
  // Row 0 is the far front, column 0 the far left.
  EXPECT_NEAR(p.x, (300 - 20.5) * 0.005, 1e-12);
  EXPECT_NEAR(p.z, (300 - 10.5) * 0.005, 1e-12);
}

TEST(AvmLutTest, EntriesMatchPerPixelOracle) {
  const CameraRig r = rig();
  const AvmSpec s = small_spec();
  const RigGeometry geo(r);
  const Lut lut = build_lut(r, s);
  int checked = 0;
  for (int row = 0; row < s.height(); row += 3) {
    for (int col = 0; col < s.width(); col += 3) {
      const Oracle o = oracle(r, s, col, row);
      if (o.tie) continue;
      const LutEntry e = map_avm_pixel(geo, s, col, row);
      ASSERT_EQ(e.valid(), o.valid) << col << "," << row;
      if (!o.valid) {
        EXPECT_FALSE(lut.at(col, row).valid());
        continue;
      }
      EXPECT_EQ(e.camera, o.camera);
      EXPECT_NEAR(e.u, o.u, 1e-9);
      EXPECT_NEAR(e.v, o.v, 1e-9);
      const auto& k = r.cameras[o.camera].intrinsics;
      EXPECT_EQ(lut.at(col, row), make_bilinear_tap(k.width, k.height, o.u, o.v, o.camera));
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(AvmLutTest, UnderBodyIsInvalid) {
  const CameraRig r = rig();
  const AvmSpec s = small_spec();
  const Lut lut = build_lut(r, s);
  EXPECT_FALSE(lut.at(s.width() / 2, s.height() / 2).valid());
  EXPECT_FALSE(map_ground_point(RigGeometry(r), {0.1, 0.05}).valid());
}

TEST(AvmLutTest, BuildIsDeterministic) {
  const CameraRig r = rig();
  const AvmSpec s = small_spec();
  EXPECT_EQ(build_lut(r, s), build_lut(r, s));
}

TEST(AvmLutTest, ApplyEqualsDirectRemap) {
  const CameraRig r = rig();
  const AvmSpec s;
  const auto imgs = views(textured_world(), r, {0.1, 0.05, 0.2});
  const Lut lut = build_lut(r, s);
  const GrayImage a = apply_lut(lut, imgs);
  const GrayImage d = remap_direct(r, s, imgs);
  ASSERT_EQ(a.width(), d.width());
  EXPECT_TRUE(a == d);
  EXPECT_TRUE(a == apply_lut(lut, imgs));
}

TEST(AvmLutTest, RoiMatchesFullComposition) {
  const CameraRig r = rig();
  const AvmSpec s;
  const WorldSpec w = textured_world();
  const Pose2 pose{0.1, 0.05, 0.2};
  const Lut lut = build_lut(r, s);
  const GrayImage full = apply_lut(lut, views(w, r, pose));
  const GroundModel g(w);
  std::vector<LazyFisheyeView> lazy;
  for (const auto& cam : r.cameras) {
    lazy.emplace_back(g, cam);
    lazy.back().reset(pose);
  }
  const PixelRect roi{40, 350, 200, 120};
  const GrayImage part = apply_lut_roi(lut, lazy, roi);
  EXPECT_TRUE(part == crop(full, roi));
}

TEST(AvmLutTest, AllInvalidLutGivesZeros) {
  const CameraRig r = rig();
  Lut lut = build_lut(r, small_spec());
  for (auto& t : lut.taps) t = BilinearTap{};
  std::vector<GrayImage> imgs;
  for (const auto& cam : r.cameras) imgs.emplace_back(cam.intrinsics.width, cam.intrinsics.height, 200);
  const GrayImage out = apply_lut(lut, imgs);
  for (auto v : out.pixels()) ASSERT_EQ(v, 0);
}

TEST(AvmLutTest, UniformInputGivesUniformValidRegion) {
  const CameraRig r = rig();
  const AvmSpec s = small_spec();
  std::vector<GrayImage> imgs;
  for (const auto& cam : r.cameras) imgs.emplace_back(cam.intrinsics.width, cam.intrinsics.height, 137);
  const GrayImage out = remap_direct(r, s, imgs);
  const Lut lut = build_lut(r, s);
  for (int row = 0; row < s.height(); ++row) {
    for (int col = 0; col < s.width(); ++col) {
      ASSERT_EQ(out.at(col, row), lut.at(col, row).valid() ? 137 : 0);
    }
  }
}

TEST(AvmLutTest, WrongImageSizeIsRejected) {
  const CameraRig r = rig();
  const Lut lut = build_lut(r, small_spec());
  std::vector<GrayImage> imgs(4, GrayImage(10, 10));
  EXPECT_THROW(apply_lut(lut, imgs), DimensionError);
}

}  // namespace
}  // namespace valet
