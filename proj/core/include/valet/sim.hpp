#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "valet/avm.hpp"
#include "valet/fisheye.hpp"
#include "valet/image.hpp"
#include "valet/world.hpp"

namespace valet {

/// AVM regions used by the driving loop, in AVM pixels.
struct AvmRegions {
  PixelRect front{220, 110, 160, 140};
  PixelRect left_bays{60, 120, 215, 440};
  PixelRect scale_band{150, 80, 120, 320};
  PixelRect left_side{180, 230, 100, 140};
  PixelRect right_side{320, 230, 100, 140};
  PixelRect rear{250, 336, 100, 120};
};

/// Camera views of one world for one vehicle pose, rendered on demand.
class Sensor {
 public:
  Sensor(const WorldSpec& world, const CameraRig& rig, const Lut& lut, double pixel_noise,
         std::uint64_t seed);

  /// Moves the rig to the vehicle's pose; cached pixels are discarded.
  void set_state(const VehicleState& state);

  /// AVM crop of the current frame, with additive Gaussian pixel noise.
  GrayImage avm(const PixelRect& roi);
  GrayImage full_avm();

  const GroundModel& ground() const { return *ground_; }
  const WorldSpec& world() const { return world_; }

 private:
  WorldSpec world_;
  std::unique_ptr<GroundModel> ground_;
  const Lut* lut_;
  std::vector<LazyFisheyeView> views_;
  double pixel_noise_;
  std::mt19937_64 rng_;
};

}  // namespace valet
