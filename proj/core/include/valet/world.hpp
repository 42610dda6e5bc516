#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valet/geometry.hpp"
#include "valet/image.hpp"

namespace valet {

enum class ArrowDirection { Left, Right };
enum class Gear { Forward, Reverse };

struct Bay {
  /// `heading` points from the opening toward the far (base-line) end;
  /// `length` is the bay depth, `width` the split-line separation.
  OrientedRect rect;
  bool occupied = false;
  bool has_base_line = true;
};

struct ArrowMarking {
  Vec2 position;
  /// Travel direction of the lane the arrow is painted on.
  double heading = 0.0;
  ArrowDirection direction = ArrowDirection::Left;
};

struct GlareSpot {
  Vec2 center;
  double radius = 0.0;
  double intensity = 0.0;
};

struct VehicleParams {
  double wheelbase = 0.24;
  double width = 0.20;
  double length = 0.36;
  double steer_max = 0.5;
  double cruise_speed = 0.3;
};

/// Ground-truth parking lot. Ground plane is y = 0; all lengths in metres.
struct WorldSpec {
  std::vector<AxisRect> lanes;
  std::vector<Bay> bays;
  std::vector<ArrowMarking> arrows;
  Segment2 scale_line;
  std::vector<GlareSpot> glare_spots;
  double floor_albedo = 0.3;
  double marking_albedo = 0.8;
  double obstacle_albedo = 0.95;
  double line_width = 0.03;
  Pose2 start_pose;
  VehicleParams vehicle;
  double model_scale = 0.1;
};

/// Kinematic bicycle state. (x, z) is the rear-axle centre.
struct VehicleState {
  double x = 0.0;
  double z = 0.0;
  double heading = 0.0;
  double steer = 0.0;
  double speed = 0.0;
  Gear gear = Gear::Forward;

  Pose2 pose() const { return {x, z, heading}; }
};

/// Parses and validates a world document (JSON). Throws ConfigError naming the
/// offending field on schema or range violations.
WorldSpec load_world(std::string_view text);
WorldSpec load_world_file(const std::string& path);

/// Throws ConfigError if any WorldSpec invariant is violated.
void validate_world(const WorldSpec& world);

/// Advances the bicycle model by `dt` seconds holding steer and speed
/// constant. The update integrates the constant-curvature arc exactly.
VehicleState step_vehicle(const VehicleState& state, const VehicleParams& params, double dt);

/// Signed distance travelled per unit speed for the current gear.
inline double signed_speed(const VehicleState& s) {
  return s.gear == Gear::Forward ? s.speed : -s.speed;
}

OrientedRect vehicle_footprint(const VehicleState& state, const VehicleParams& params);
Vec2 vehicle_center(const Pose2& rear_axle_pose, const VehicleParams& params);

/// Minimum distance from the vehicle footprint to the bay border; negative if
/// any part of the footprint lies outside the bay.
double bay_clearance(const VehicleState& state, const VehicleParams& params,
                     const OrientedRect& bay);

/// Pre-indexed ground appearance of a world. Evaluating a point is a pure
/// function of the world it was built from.
class GroundModel {
 public:
  explicit GroundModel(const WorldSpec& world);

  /// Intensity in [0, 1] at ground point `p`.
  double intensity(Vec2 p) const;

 private:
  struct Primitive {
    enum class Kind { Rect, Tri } kind;
    OrientedRect rect;
    Triangle tri;
    double albedo;
  };
  struct Cell {
    std::vector<int> primitives;
    std::vector<int> glare;
  };

  void index_box(Vec2 lo, Vec2 hi, int id, bool glare);
  const Cell* cell_at(Vec2 p) const;

  double floor_ = 0.0;
  std::vector<Primitive> prims_;
  std::vector<GlareSpot> glare_;
  Vec2 origin_;
  double cell_size_ = 0.25;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<Cell> cells_;
};

/// Paint primitives making up an arrow: shaft rectangle and head triangle.
struct ArrowShape {
  OrientedRect shaft;
  Triangle head;
};
ArrowShape arrow_shape(const ArrowMarking& arrow);

/// Orthographic top-down render. Column index grows with +x, row index grows
/// with -z; pixel centres are sampled (no anti-aliasing).
GrayImage render_ground(const WorldSpec& world, Vec2 center, double extent_x, double extent_z,
                        double resolution);
GrayImage render_ground(const GroundModel& ground, Vec2 center, double extent_x, double extent_z,
                        double resolution);

}  // namespace valet
