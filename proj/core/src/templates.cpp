#include <cmath>

#include "valet/perception.hpp"

namespace valet {
namespace {

constexpr std::uint8_t kFloorLevel = 77;
constexpr std::uint8_t kMarkLevel = 204;
// Bay width over depth for a typical perpendicular bay; converts a line
// thickness measured across the bay into the depth direction.
constexpr double kAspect = 0.58;

// Template frame: u runs far end (0) to opening (1); v runs split a (0) to split b (1).
GrayImage make_template(double thickness, bool with_base, BaySide side) {
  GrayImage img(kTemplateWidth, kTemplateHeight, kFloorLevel);
  const double span = 1.0 + 2.0 * kTemplateMargin;
  const double half_v = 0.5 * thickness;
  const double half_u = 0.5 * thickness * kAspect;
  for (int r = 0; r < kTemplateHeight; ++r) {
    const double v = -kTemplateMargin + (r + 0.5) / kTemplateHeight * span;
    for (int c = 0; c < kTemplateWidth; ++c) {
      const double uc = -kTemplateMargin + (c + 0.5) / kTemplateWidth * span;
      const double u = side == BaySide::Left ? uc : 1.0 - uc;
      const bool in_depth = u >= -half_u && u <= 1.0;
      const bool split = in_depth && (std::abs(v) <= half_v || std::abs(v - 1.0) <= half_v);
      const bool base = with_base && std::abs(u) <= half_u && v >= -half_v && v <= 1.0 + half_v;
      if (split || base) img.at(c, r) = kMarkLevel;
    }
  }
  return img;
}

}  // namespace

TemplateBank make_template_bank() {
  TemplateBank bank;
  for (double thickness : {0.06, 0.09, 0.12}) {
    for (bool with_base : {true, false}) {
      bank.left.push_back(make_template(thickness, with_base, BaySide::Left));
      bank.right.push_back(make_template(thickness, with_base, BaySide::Right));
    }
  }
  return bank;
}

}  // namespace valet
