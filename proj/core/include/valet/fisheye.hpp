#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "valet/geometry.hpp"
#include "valet/image.hpp"
#include "valet/world.hpp"

namespace valet {

/// Ideal equidistant fisheye: image radius r = focal * theta.
struct FisheyeIntrinsics {
  double focal = 255.0;  ///< pixels per radian
  double cx = 400.0;
  double cy = 400.0;
  int width = 800;
  int height = 800;
  double fov = kPi;

  /// Throws PreconditionError when the full field of view does not fit.
  void validate() const;
};

/// Camera mounting relative to the vehicle centre (footprint centre).
struct CameraExtrinsic {
  double forward = 0.0;  ///< m along the vehicle heading
  double left = 0.0;     ///< m to the vehicle's left
  double height = 0.3;   ///< m above ground
  double yaw = 0.0;      ///< optical-axis azimuth relative to the heading, rad (left positive)
  double pitch = 0.0;    ///< downward tilt of the optical axis, rad
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Camera frame: x right in the image, y down in the image, z along the optical axis.
/// Vehicle frame (3D): x forward, y left, z up.
struct CameraBasis {
  Vec3 right;
  Vec3 down;
  Vec3 axis;
  Vec3 origin;
};
CameraBasis camera_basis(const CameraExtrinsic& e);

struct FisheyeCamera {
  FisheyeIntrinsics intrinsics;
  CameraExtrinsic extrinsic;
};

enum class CameraId : int { Front = 0, Rear = 1, Left = 2, Right = 3 };
inline constexpr int kCameraCount = 4;

struct CameraRig {
  std::array<FisheyeCamera, kCameraCount> cameras;
  /// Vehicle body extent; ground under the body is occluded for every camera.
  double body_length = 0.36;
  double body_width = 0.20;

  void validate() const;
  /// Stable hash of every parameter; identifies the rig a LUT was built for.
  std::uint64_t fingerprint() const;
};

/// Rig with cameras at bumper and side centres, looking outward and pitched down.
CameraRig default_rig(const VehicleParams& vehicle, double height = 0.3, double pitch = deg2rad(30.0),
                      int image_size = 800);

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Projects a point given in the vehicle frame (forward, left, up). Returns
/// nullopt when the ray lies outside the lens field of view.
/// atan2(rho, z) for rho >= 0, in [0, pi]; accurate to about 1e-11 rad.
double polar_angle(double rho, double z);

std::optional<PixelCoord> project_point(const FisheyeIntrinsics& k, const CameraBasis& cam, Vec3 p);

/// Projects a ground point (forward, left) of the vehicle frame.
std::optional<PixelCoord> project_ground_to_fisheye(const FisheyeIntrinsics& k,
                                                    const CameraExtrinsic& e, Vec2 ground);

/// Unit ray in camera coordinates for pixel coordinates, or nullopt outside the FOV.
std::optional<Vec3> unproject(const FisheyeIntrinsics& k, PixelCoord px);

/// Intersection of the ray through `px` with the ground plane, in the vehicle frame.
std::optional<Vec2> fisheye_pixel_ground_hit(const FisheyeIntrinsics& k, const CameraBasis& cam,
                                             PixelCoord px);

/// Synthetic fisheye frame for a vehicle whose footprint centre is at `center_pose`.
/// Pixels whose ray misses the ground (or leave the FOV) are 0.
GrayImage render_fisheye_view(const GroundModel& ground, const FisheyeCamera& camera,
                              const Pose2& center_pose);

/// Lazily evaluated fisheye frame: each pixel is rendered on first access and
/// cached until `reset`. Values match render_fisheye_view exactly.
class LazyFisheyeView {
 public:
  LazyFisheyeView(const GroundModel& ground, const FisheyeCamera& camera);

  void reset(const Pose2& center_pose);
  std::uint8_t at(int col, int row);
  int width() const { return camera_.intrinsics.width; }
  int height() const { return camera_.intrinsics.height; }

 private:
  const GroundModel* ground_;
  FisheyeCamera camera_;
  CameraBasis basis_;
  Pose2 pose_;
  std::uint32_t generation_ = 1;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint8_t> value_;
};

std::uint8_t fisheye_pixel_value(const GroundModel& ground, const FisheyeCamera& camera,
                                 const CameraBasis& basis, const Pose2& center_pose, int col,
                                 int row);

}  // namespace valet
