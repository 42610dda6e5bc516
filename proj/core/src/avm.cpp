#include "valet/avm.hpp"

#include <cmath>
#include <string>

namespace valet {

int AvmSpec::width() const { return static_cast<int>(std::lround(extent_lateral / resolution)); }
int AvmSpec::height() const { return static_cast<int>(std::lround(extent_forward / resolution)); }

void AvmSpec::validate() const {
  if (!(resolution > 0.0)) throw PreconditionError("avm: resolution must be positive");
  if (!(extent_forward > 0.0 && extent_lateral > 0.0)) {
    throw PreconditionError("avm: extent must be positive");
  }
}

Vec2 AvmSpec::pixel_to_vehicle(double col, double row) const {
  const double forward = (0.5 * height() - (row + 0.5)) * resolution;
  const double right = (col + 0.5 - 0.5 * width()) * resolution;
  return {forward, -right};
}

PixelCoord AvmSpec::vehicle_to_pixel(Vec2 p) const {
  return {-p.z / resolution + 0.5 * width(), 0.5 * height() - p.x / resolution};
}

namespace {

int nearest_axis(const std::array<Vec2, kCameraCount>& axis_dir, Vec2 p) {
  // Largest cosine between the point azimuth and the optical-axis azimuth is
  // the nearest azimuth; the norm of p is common to all cameras.
  int best = 0;
  double best_cos = -1e300;
  for (int i = 0; i < kCameraCount; ++i) {
    const double c = dot(p, axis_dir[i]);
    if (c > best_cos + 1e-12) {
      best = i;
      best_cos = c;
    }
  }
  return best;
}

}  // namespace

RigGeometry::RigGeometry(const CameraRig& r) : rig(&r) {
  for (int i = 0; i < kCameraCount; ++i) {
    bases[i] = camera_basis(r.cameras[i].extrinsic);
    axis_dir[i] = heading_dir(r.cameras[i].extrinsic.yaw);
  }
}

int assign_camera(const CameraRig& rig, Vec2 p) { return nearest_axis(RigGeometry(rig).axis_dir, p); }

LutEntry map_avm_pixel(const RigGeometry& geo, const AvmSpec& spec, int col, int row) {
  return map_ground_point(geo, spec.pixel_to_vehicle(col, row));
}

LutEntry map_ground_point(const RigGeometry& geo, Vec2 p) {
  const CameraRig& rig = *geo.rig;
  if (std::abs(p.x) <= 0.5 * rig.body_length && std::abs(p.z) <= 0.5 * rig.body_width) return {};
  const int cam = nearest_axis(geo.axis_dir, p);
  const FisheyeIntrinsics& k = rig.cameras[cam].intrinsics;
  const auto px = project_point(k, geo.bases[cam], {p.x, p.z, 0.0});
  if (!px || px->u < 0.0 || px->v < 0.0 || px->u >= k.width || px->v >= k.height) return {};
  return {px->u, px->v, cam};
}

BilinearTap to_tap(const CameraRig& rig, const LutEntry& e) {
  if (!e.valid()) return {};
  const FisheyeIntrinsics& k = rig.cameras[e.camera].intrinsics;
  return make_bilinear_tap(k.width, k.height, e.u, e.v, e.camera);
}

namespace {

// Pixel-centre coordinates of every row and column, evaluated once per pass
// with the same arithmetic as AvmSpec::pixel_to_vehicle.
class PixelGrid {
 public:
  explicit PixelGrid(const AvmSpec& spec) {
    const int w = spec.width();
    const int h = spec.height();
    forward_.resize(static_cast<std::size_t>(h));
    left_.resize(static_cast<std::size_t>(w));
    for (int r = 0; r < h; ++r) forward_[r] = spec.pixel_to_vehicle(0, r).x;
    for (int c = 0; c < w; ++c) left_[c] = spec.pixel_to_vehicle(c, 0).z;
  }
  Vec2 point(int col, int row) const { return {forward_[row], left_[col]}; }

 private:
  std::vector<double> forward_;
  std::vector<double> left_;
};

void check_images(const std::array<int, kCameraCount>& w, const std::array<int, kCameraCount>& h,
                  std::span<const GrayImage> images) {
  static constexpr const char* kNames[] = {"front", "rear", "left", "right"};
  if (images.size() != kCameraCount) throw DimensionError("expected four camera images");
  for (int i = 0; i < kCameraCount; ++i) {
    if (images[i].width() != w[i] || images[i].height() != h[i]) {
      throw DimensionError(std::string("image size mismatch for camera '") + kNames[i] + "'");
    }
  }
}

}  // namespace

Lut build_lut(const CameraRig& rig, const AvmSpec& spec) {
  rig.validate();
  spec.validate();
  Lut lut;
  lut.spec = spec;
  lut.rig_fingerprint = rig.fingerprint();
  for (int i = 0; i < kCameraCount; ++i) {
    lut.image_width[i] = rig.cameras[i].intrinsics.width;
    lut.image_height[i] = rig.cameras[i].intrinsics.height;
  }
  const RigGeometry geo(rig);
  const int w = spec.width();
  const int h = spec.height();
  lut.width = w;
  lut.height = h;
  lut.taps.resize(static_cast<std::size_t>(w) * h);
  const PixelGrid grid(spec);
  // Map a row first, then convert: keeps the tap stores (char-typed fields)
  // out of the projection loop, where they would defeat alias analysis.
  std::vector<LutEntry> row(static_cast<std::size_t>(w));
  BilinearTap* tap = lut.taps.data();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) row[c] = map_ground_point(geo, grid.point(c, r));
    for (int c = 0; c < w; ++c) *tap++ = to_tap(rig, row[c]);
  }
  return lut;
}

GrayImage apply_lut(const Lut& lut, std::span<const GrayImage> images) {
  check_images(lut.image_width, lut.image_height, images);
  const int w = lut.width;
  const int h = lut.height;
  GrayImage out(w, h);
  const BilinearTap* t = lut.taps.data();
  for (int r = 0; r < h; ++r) {
    auto row = out.row(r);
    for (int c = 0; c < w; ++c, ++t) {
      if (t->valid()) row[c] = sample_tap(images[t->source], *t);
    }
  }
  return out;
}

GrayImage remap_direct(const CameraRig& rig, const AvmSpec& spec, std::span<const GrayImage> images) {
  std::array<int, kCameraCount> iw{}, ih{};
  for (int i = 0; i < kCameraCount; ++i) {
    iw[i] = rig.cameras[i].intrinsics.width;
    ih[i] = rig.cameras[i].intrinsics.height;
  }
  check_images(iw, ih, images);
  const RigGeometry geo(rig);
  const int w = spec.width();
  const int h = spec.height();
  GrayImage out(w, h);
  const PixelGrid grid(spec);
  std::vector<LutEntry> row(static_cast<std::size_t>(w));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) row[c] = map_ground_point(geo, grid.point(c, r));
    auto dst = out.row(r);
    for (int c = 0; c < w; ++c) {
      if (row[c].valid()) dst[c] = sample_tap(images[row[c].camera], to_tap(rig, row[c]));
    }
  }
  return out;
}

GrayImage apply_lut_roi(const Lut& lut, std::span<LazyFisheyeView> views, const PixelRect& roi) {
  if (views.size() != kCameraCount) throw DimensionError("expected four camera views");
  if (!roi.inside(lut.width, lut.height)) throw DimensionError("ROI outside AVM");
  GrayImage out(roi.width, roi.height);
  for (int r = 0; r < roi.height; ++r) {
    for (int c = 0; c < roi.width; ++c) {
      const BilinearTap& t = lut.at(roi.col0 + c, roi.row0 + r);
      if (!t.valid()) continue;
      LazyFisheyeView& view = views[t.source];
      out.at(c, r) = sample_tap_with([&view](int x, int y) { return view.at(x, y); }, t);
    }
  }
  return out;
}

}  // namespace valet
