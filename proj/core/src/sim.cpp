#include "valet/sim.hpp"

#include <algorithm>
#include <cmath>

namespace valet {

Sensor::Sensor(const WorldSpec& world, const CameraRig& rig, const Lut& lut, double pixel_noise,
               std::uint64_t seed)
    : world_(world),
      ground_(std::make_unique<GroundModel>(world_)),
      lut_(&lut),
      pixel_noise_(pixel_noise),
      rng_(seed) {
  for (const FisheyeCamera& cam : rig.cameras) views_.emplace_back(*ground_, cam);
}

void Sensor::set_state(const VehicleState& state) {
  const Vec2 c = vehicle_center(state.pose(), world_.vehicle);
  for (LazyFisheyeView& v : views_) v.reset({c.x, c.z, state.heading});
}

GrayImage Sensor::avm(const PixelRect& roi) {
  GrayImage img = apply_lut_roi(*lut_, views_, roi);
  if (pixel_noise_ > 0.0) {
    std::normal_distribution<double> n(0.0, pixel_noise_);
    for (std::uint8_t& p : img.pixels()) {
      p = static_cast<std::uint8_t>(std::clamp(std::lround(p + n(rng_)), 0L, 255L));
    }
  }
  return img;
}

GrayImage Sensor::full_avm() { return avm({0, 0, lut_->spec.width(), lut_->spec.height()}); }

}  // namespace valet
