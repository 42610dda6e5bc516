#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "valet/fisheye.hpp"
#include "valet/image.hpp"

namespace valet {

/// Top-down AVM window centred on the vehicle (footprint centre). Row 0 is the
/// far front edge; column 0 is the far left edge.
struct AvmSpec {
  double extent_forward = 3.0;  ///< m
  double extent_lateral = 3.0;  ///< m
  double resolution = 0.005;    ///< m per pixel

  int width() const;
  int height() const;
  void validate() const;

  /// Ground point (forward, left) in the vehicle frame at the centre of pixel (col, row).
  Vec2 pixel_to_vehicle(double col, double row) const;
  /// Continuous pixel coordinates (col, row) of a vehicle-frame ground point.
  PixelCoord vehicle_to_pixel(Vec2 p) const;

  friend bool operator==(const AvmSpec&, const AvmSpec&) = default;
};

/// Camera whose optical-axis azimuth is nearest to the azimuth of `p` seen from
/// the vehicle centre; ties go to the lower camera id.
int assign_camera(const CameraRig& rig, Vec2 p);

struct LutEntry {
  double u = 0.0;
  double v = 0.0;
  std::int32_t camera = -1;  ///< -1 marks an invalid entry

  bool valid() const { return camera >= 0; }
  friend bool operator==(const LutEntry&, const LutEntry&) = default;
};

/// Per-AVM-pixel source mapping: camera id, source pixel and bilinear weights.
struct Lut {
  AvmSpec spec;
  std::uint64_t rig_fingerprint = 0;
  std::array<int, kCameraCount> image_width{};
  std::array<int, kCameraCount> image_height{};
  int width = 0;
  int height = 0;
  /// Row-major, width x height; `source` is the camera id, -1 where no camera sees the ground.
  std::vector<BilinearTap> taps;

  const BilinearTap& at(int col, int row) const {
    return taps[static_cast<std::size_t>(row) * width + col];
  }
  friend bool operator==(const Lut&, const Lut&) = default;
};

/// Per-call geometry shared by every pixel of one mapping pass.
struct RigGeometry {
  explicit RigGeometry(const CameraRig& rig);

  const CameraRig* rig;
  std::array<CameraBasis, kCameraCount> bases;
  std::array<Vec2, kCameraCount> axis_dir;
};

/// The mapping for a single AVM pixel, computed from scratch.
LutEntry map_avm_pixel(const RigGeometry& geo, const AvmSpec& spec, int col, int row);
/// Mapping for a vehicle-frame ground point (forward, left).
LutEntry map_ground_point(const RigGeometry& geo, Vec2 p);

/// Sampling form of a mapped entry; invalid entries give an invalid tap.
BilinearTap to_tap(const CameraRig& rig, const LutEntry& e);

Lut build_lut(const CameraRig& rig, const AvmSpec& spec);

/// Composes the AVM by bilinear sampling of the designated camera at the
/// stored taps; pixels without a source become 0.
GrayImage apply_lut(const Lut& lut, std::span<const GrayImage> images);

/// Same output contract as apply_lut, recomputing every projection.
GrayImage remap_direct(const CameraRig& rig, const AvmSpec& spec, std::span<const GrayImage> images);

/// LUT composition restricted to `roi` (AVM pixels) with lazily rendered
/// fisheye sources; only the fisheye pixels the ROI touches are evaluated.
/// The returned image has the ROI's size.
GrayImage apply_lut_roi(const Lut& lut, std::span<LazyFisheyeView> views, const PixelRect& roi);

}  // namespace valet
