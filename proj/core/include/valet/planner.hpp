#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "valet/avm.hpp"
#include "valet/keyframe_map.hpp"
#include "valet/perception.hpp"
#include "valet/turn_command.hpp"
#include "valet/world.hpp"

namespace valet {

struct Controls {
  double steer = 0.0;  ///< rad, positive turns left
  double speed = 0.0;  ///< m/s, non-negative; direction comes from the gear
  Gear gear = Gear::Forward;
};

/// Fraction of steer_max used for arrow-commanded 90 degree turns.
inline constexpr double kTurnSteerFraction = 0.8;

/// Straight at cruise speed unless a command is active and its heading
/// progress (radians, unsigned) is still short of 90 degrees.
Controls initial_drive_policy(const std::optional<TurnCommand>& cmd, bool rotating,
                              double heading_progress, const VehicleParams& params);

/// Tracks one arrow-commanded rotation at a time; new commands are ignored
/// while rotating.
class ArrowDriver {
 public:
  explicit ArrowDriver(VehicleParams params) : params_(params) {}

  /// `heading` is the current vehicle heading in radians.
  Controls step(const std::optional<TurnCommand>& cmd, double heading);
  bool rotating() const { return active_.has_value(); }
  int turns_completed() const { return turns_; }

 private:
  VehicleParams params_;
  std::optional<TurnCommand> active_;
  double start_heading_ = 0.0;
  int turns_ = 0;
};

/// Radius of the circle through three points; +infinity for collinear points.
/// Throws PreconditionError on duplicate points.
double circumradius(Vec2 p1, Vec2 p2, Vec2 p3);

/// Minimum finite circumradius over consecutive keyframe triples. Throws
/// EstimationError when every triple is collinear.
double min_turning_radius(std::span<const Vec2> keyframes);

enum class FollowMode { Follow, CorrectiveLeft, CorrectiveRight, Done };

struct FollowerState {
  int target = 0;
  double arrival_distance = 0.0;  ///< map units
  double r_min = 0.0;             ///< map units
  double wheelbase_map = 0.0;     ///< wheelbase expressed in map units
  FollowMode mode = FollowMode::Follow;
};

/// Builds a follower for a closed map: arrival distance is the mean adjacent
/// keyframe spacing, R_min the minimum circumradius.
FollowerState make_follower(const KeyframeMap& map, double map_units_per_metre,
                            const VehicleParams& params);

FollowerState select_target_keyframe(std::span<const Keyframe> keyframes, const Pose2& vehicle,
                                     FollowerState state);

enum class Reachability { Reachable, UnreachableLeft, UnreachableRight };

/// `target` is (forward, left) in the vehicle frame.
Reachability reachability(Vec2 target, double r_min);

/// Pure pursuit toward a reachable target, corrective reverse otherwise.
Controls follow_controls(const FollowerState& state, Vec2 target, const VehicleParams& params);

/// Target selection, reachability and controls in one call. Mode is updated
/// from the reachability result.
std::pair<FollowerState, Controls> follow_step(std::span<const Keyframe> keyframes,
                                               const Pose2& vehicle, FollowerState state,
                                               const VehicleParams& params);

/// Two tangent-continuous circular arcs joining `from` to `to` (position and
/// heading), equal tangent lengths. Curvature is signed, positive to the left.
struct Biarc {
  double k1 = 0.0;
  double s1 = 0.0;
  double k2 = 0.0;
  double s2 = 0.0;

  double length() const { return s1 + s2; }
};

/// Forward biarc, or nullopt when it would need reverse motion or a turn of
/// half a circle or more on either arc.
std::optional<Biarc> plan_biarc(const Pose2& from, const Pose2& to);

enum class ParkingPhase { Locate, ForwardOffset, ReverseTurn, AlignStraight, DepthStop, Done, Aborted };

const char* to_string(ParkingPhase phase);

struct ParkingParams {
  double forward_offset_m = 0.18;  ///< metres of forward travel before reversing
  double slope_tol_deg = 1.0;
  double gap_threshold_px = 10.0;
  /// Locate accepts a hypothesis once its centre row reaches this row.
  double trigger_row = 0.0;
  double trigger_window = 8.0;  ///< px past trigger_row still accepted
  AvmSpec avm;                  ///< view the hypothesis rows refer to
  int lost_frames_limit = 10;
  double reverse_speed_fraction = 0.5;
  /// Safety limits: ReverseTurn aborts past this heading change, DepthStop
  /// past this straight reverse travel.
  double max_reverse_turn_deg = 135.0;
  double max_depth_travel_m = 1.0;
};

/// AVM row at which the bay centre must sit when ForwardOffset starts so that
/// the forward arc plus the reverse arc (both at steer_max) end over the bay centre.
/// Mean row of the hypothesis corners.
double center_row(const ParkingSpaceHypothesis& h);

double parking_trigger_row(const VehicleParams& params, const AvmSpec& avm, double forward_offset_m);

/// Inverse of parking_trigger_row: forward travel (metres) that brings the
/// manoeuvre over a bay whose centre sits at `row`. Clamped to [0, R*pi/2].
double forward_offset_for_row(const VehicleParams& params, const AvmSpec& avm, double row);

struct ParkingFsm {
  ParkingPhase phase = ParkingPhase::Locate;
  BaySide side = BaySide::Left;
  double destination_map = 0.0;  ///< forward travel to cover, map units
  double travelled_map = 0.0;
  double turned = 0.0;  ///< |heading change| accumulated in ReverseTurn, radians
  std::optional<Pose2> last_pose;
  std::optional<ParkingSpaceHypothesis> target;
  int lost_frames = 0;
};

/// One control tick of the five-step parking sequence. `hypothesis` is the
/// best detection of the current frame, if any.
std::pair<ParkingFsm, Controls> parking_fsm_step(ParkingFsm fsm,
                                                 const std::optional<ParkingSpaceHypothesis>& hypothesis,
                                                 const Alignment& alignment,
                                                 const ScaleEstimate& scale, const Pose2& map_pose,
                                                 const VehicleParams& vehicle,
                                                 const ParkingParams& params);

}  // namespace valet
