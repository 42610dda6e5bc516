#pragma once

#include "valet/geometry.hpp"
#include "valet/world.hpp"

namespace valet {

/// A 90 degree turn request issued by the arrow debouncer.
struct TurnCommand {
  ArrowDirection direction = ArrowDirection::Left;

  /// Signed heading change: +90 deg for left, -90 deg for right.
  double heading_change() const { return direction == ArrowDirection::Left ? 0.5 * kPi : -0.5 * kPi; }
  friend bool operator==(TurnCommand, TurnCommand) = default;
};

}  // namespace valet
