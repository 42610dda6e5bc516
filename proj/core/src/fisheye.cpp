#include "valet/fisheye.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace valet {
namespace {

Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double dot3(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross3(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

template <typename T>
void hash_value(std::uint64_t& h, T v) {
  hash_bytes(h, &v, sizeof(v));
}

}  // namespace

double polar_angle(double rho, double z) {
  // atan2(rho, z) for rho >= 0: reduce to |t| <= tan(pi/8), then an odd
  // Taylor series (truncation error below 2e-12 rad).
  constexpr double kTanPi8 = 0.41421356237309503;
  const double a = std::abs(z);
  if (rho == 0.0 && a == 0.0) return 0.0;
  const bool swapped = rho > a;
  double t = swapped ? a / rho : rho / a;  // in [0, 1]
  double base = 0.0;
  if (t > kTanPi8) {
    t = (t - 1.0) / (t + 1.0);
    base = 0.25 * kPi;
  }
  const double t2 = t * t;
  double p = 1.0 / 25.0;
  for (int k = 23; k >= 1; k -= 2) p = p * t2 + ((k / 2) % 2 == 0 ? 1.0 : -1.0) / k;
  double angle = base + t * p;
  if (swapped) angle = 0.5 * kPi - angle;
  return z < 0.0 ? kPi - angle : angle;
}

void FisheyeIntrinsics::validate() const {
  if (!(focal > 0.0)) throw PreconditionError("fisheye: focal must be positive");
  if (!(fov > 0.0 && fov <= kPi)) throw PreconditionError("fisheye: fov must be in (0, pi]");
  if (width <= 0 || height <= 0) throw PreconditionError("fisheye: image size must be positive");
  if (width > 32767 || height > 32767) throw PreconditionError("fisheye: image size exceeds 32767");
  const double margin = std::min({cx, cy, width - cx, height - cy});
  if (focal * 0.5 * fov > margin + 1e-9) {
    throw PreconditionError("fisheye: field of view does not fit inside the image");
  }
}

CameraBasis camera_basis(const CameraExtrinsic& e) {
  const double cp = std::cos(e.pitch);
  const double sp = std::sin(e.pitch);
  const double cy = std::cos(e.yaw);
  const double sy = std::sin(e.yaw);
  CameraBasis b;
  b.axis = {cp * cy, cp * sy, -sp};
  b.right = {sy, -cy, 0.0};
  b.down = cross3(b.axis, b.right);
  b.origin = {e.forward, e.left, e.height};
  return b;
}

void CameraRig::validate() const {
  for (const FisheyeCamera& cam : cameras) {
    cam.intrinsics.validate();
    if (!(cam.extrinsic.height > 0.0)) throw PreconditionError("rig: camera height must be positive");
  }
  if (!(body_length > 0.0 && body_width > 0.0)) throw PreconditionError("rig: body extent must be positive");
}

std::uint64_t CameraRig::fingerprint() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const FisheyeCamera& cam : cameras) {
    const FisheyeIntrinsics& k = cam.intrinsics;
    const CameraExtrinsic& e = cam.extrinsic;
    for (double v : {k.focal, k.cx, k.cy, k.fov, e.forward, e.left, e.height, e.yaw, e.pitch}) {
      hash_value(h, v);
    }
    hash_value(h, k.width);
    hash_value(h, k.height);
  }
  hash_value(h, body_length);
  hash_value(h, body_width);
  return h;
}

CameraRig default_rig(const VehicleParams& vehicle, double height, double pitch, int image_size) {
  FisheyeIntrinsics k;
  k.width = image_size;
  k.height = image_size;
  k.cx = 0.5 * image_size;
  k.cy = 0.5 * image_size;
  k.fov = kPi;
  k.focal = 0.5 * image_size / (0.5 * kPi);
  const double hl = 0.5 * vehicle.length;
  const double hw = 0.5 * vehicle.width;
  CameraRig rig;
  rig.body_length = vehicle.length;
  rig.body_width = vehicle.width;
  rig.cameras[static_cast<int>(CameraId::Front)] = {k, {hl, 0.0, height, 0.0, pitch}};
  rig.cameras[static_cast<int>(CameraId::Rear)] = {k, {-hl, 0.0, height, kPi, pitch}};
  rig.cameras[static_cast<int>(CameraId::Left)] = {k, {0.0, hw, height, 0.5 * kPi, pitch}};
  rig.cameras[static_cast<int>(CameraId::Right)] = {k, {0.0, -hw, height, -0.5 * kPi, pitch}};
  return rig;
}

std::optional<PixelCoord> project_point(const FisheyeIntrinsics& k, const CameraBasis& cam, Vec3 p) {
  const Vec3 d = p - cam.origin;
  const double x = dot3(d, cam.right);
  const double y = dot3(d, cam.down);
  const double z = dot3(d, cam.axis);
  const double rho = std::sqrt(x * x + y * y);
  const double theta = polar_angle(rho, z);
  if (theta > 0.5 * k.fov) return std::nullopt;
  if (rho == 0.0) return PixelCoord{k.cx, k.cy};
  const double s = k.focal * theta / rho;
  return PixelCoord{k.cx + s * x, k.cy + s * y};
}

std::optional<PixelCoord> project_ground_to_fisheye(const FisheyeIntrinsics& k,
                                                    const CameraExtrinsic& e, Vec2 ground) {
  return project_point(k, camera_basis(e), {ground.x, ground.z, 0.0});
}

std::optional<Vec3> unproject(const FisheyeIntrinsics& k, PixelCoord px) {
  const double dx = px.u - k.cx;
  const double dy = px.v - k.cy;
  const double rr = std::hypot(dx, dy);
  const double theta = rr / k.focal;
  if (theta > 0.5 * k.fov) return std::nullopt;
  if (rr == 0.0) return Vec3{0.0, 0.0, 1.0};
  const double s = std::sin(theta) / rr;
  return Vec3{s * dx, s * dy, std::cos(theta)};
}

std::optional<Vec2> fisheye_pixel_ground_hit(const FisheyeIntrinsics& k, const CameraBasis& cam,
                                             PixelCoord px) {
  const auto ray = unproject(k, px);
  if (!ray) return std::nullopt;
  const Vec3 d{ray->x * cam.right.x + ray->y * cam.down.x + ray->z * cam.axis.x,
               ray->x * cam.right.y + ray->y * cam.down.y + ray->z * cam.axis.y,
               ray->x * cam.right.z + ray->y * cam.down.z + ray->z * cam.axis.z};
  if (d.z >= -1e-12) return std::nullopt;
  const double t = -cam.origin.z / d.z;
  return Vec2{cam.origin.x + t * d.x, cam.origin.y + t * d.y};
}

std::uint8_t fisheye_pixel_value(const GroundModel& ground, const FisheyeCamera& camera,
                                 const CameraBasis& basis, const Pose2& center_pose, int col,
                                 int row) {
  const auto hit = fisheye_pixel_ground_hit(camera.intrinsics, basis, {col + 0.5, row + 0.5});
  if (!hit) return 0;
  return to_level(ground.intensity(to_world(center_pose, *hit)));
}

GrayImage render_fisheye_view(const GroundModel& ground, const FisheyeCamera& camera,
                              const Pose2& center_pose) {
  if (!(camera.extrinsic.height > 0.0)) {
    throw PreconditionError("render_fisheye_view: camera height must be positive");
  }
  const FisheyeIntrinsics& k = camera.intrinsics;
  const CameraBasis basis = camera_basis(camera.extrinsic);
  GrayImage img(k.width, k.height);
  for (int r = 0; r < k.height; ++r) {
    for (int c = 0; c < k.width; ++c) {
      img.at(c, r) = fisheye_pixel_value(ground, camera, basis, center_pose, c, r);
    }
  }
  return img;
}

LazyFisheyeView::LazyFisheyeView(const GroundModel& ground, const FisheyeCamera& camera)
    : ground_(&ground),
      camera_(camera),
      basis_(camera_basis(camera.extrinsic)),
      stamp_(static_cast<std::size_t>(camera.intrinsics.width) * camera.intrinsics.height, 0),
      value_(stamp_.size(), 0) {}

void LazyFisheyeView::reset(const Pose2& center_pose) {
  pose_ = center_pose;
  if (++generation_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    generation_ = 1;
  }
}

std::uint8_t LazyFisheyeView::at(int col, int row) {
  const std::size_t i = static_cast<std::size_t>(row) * camera_.intrinsics.width + col;
  if (stamp_[i] != generation_) {
    value_[i] = fisheye_pixel_value(*ground_, camera_, basis_, pose_, col, row);
    stamp_[i] = generation_;
  }
  return value_[i];
}

}  // namespace valet
