#include "valet/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "valet/errors.hpp"

namespace valet {

Controls initial_drive_policy(const std::optional<TurnCommand>& cmd, bool rotating,
                              double heading_progress, const VehicleParams& params) {
  Controls c;
  c.speed = params.cruise_speed;
  if (cmd && rotating && std::abs(heading_progress) < 0.5 * kPi) {
    const double s = kTurnSteerFraction * params.steer_max;
    c.steer = cmd->direction == ArrowDirection::Left ? s : -s;
  }
  return c;
}

Controls ArrowDriver::step(const std::optional<TurnCommand>& cmd, double heading) {
  if (!active_ && cmd) {
    active_ = cmd;
    start_heading_ = heading;
  }
  double progress = 0.0;
  if (active_) {
    progress = std::abs(normalize_angle(heading - start_heading_));
    if (progress >= 0.5 * kPi) {
      active_.reset();
      ++turns_;
    }
  }
  return initial_drive_policy(active_, active_.has_value(), progress, params_);
}

double circumradius(Vec2 p1, Vec2 p2, Vec2 p3) {
  if (p1 == p2 || p2 == p3 || p1 == p3) throw PreconditionError("circumradius: duplicate points");
  const Vec2 b = p2 - p1;
  const Vec2 c = p3 - p1;
  const double d = 2.0 * cross(b, c);
  const double scale = std::max({dot(b, b), dot(c, c), dot(p3 - p2, p3 - p2)});
  if (std::abs(d) <= 1e-12 * scale) return std::numeric_limits<double>::infinity();
  // Intersection of the perpendicular bisectors, relative to p1.
  const double bb = dot(b, b);
  const double cc = dot(c, c);
  const Vec2 center{(c.z * bb - b.z * cc) / d, (b.x * cc - c.x * bb) / d};
  return norm(center);
}

double min_turning_radius(std::span<const Vec2> keyframes) {
  if (keyframes.size() < 3) throw PreconditionError("min_turning_radius: need at least 3 keyframes");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 2 < keyframes.size(); ++i) {
    best = std::min(best, circumradius(keyframes[i], keyframes[i + 1], keyframes[i + 2]));
  }
  if (!std::isfinite(best)) throw EstimationError("min_turning_radius: degenerate (collinear) map");
  return best;
}

FollowerState make_follower(const KeyframeMap& map, double map_units_per_metre,
                            const VehicleParams& params) {
  const auto& kfs = map.keyframes();
  if (kfs.size() < 3) throw StateError("make_follower: map has fewer than 3 keyframes");
  std::vector<Vec2> pts;
  double spacing = 0.0;
  for (std::size_t i = 0; i < kfs.size(); ++i) {
    pts.push_back(kfs[i].pose.position());
    if (i > 0) spacing += distance(pts[i - 1], pts[i]);
  }
  FollowerState s;
  s.arrival_distance = spacing / static_cast<double>(kfs.size() - 1);
  s.r_min = min_turning_radius(pts);
  s.wheelbase_map = params.wheelbase * map_units_per_metre;
  return s;
}

FollowerState select_target_keyframe(std::span<const Keyframe> keyframes, const Pose2& vehicle,
                                     FollowerState state) {
  if (state.mode == FollowMode::Done) return state;
  if (state.target < 0 || state.target >= static_cast<int>(keyframes.size())) {
    state.mode = FollowMode::Done;
    return state;
  }
  const Vec2 p = keyframes[state.target].pose.position();
  const Vec2 local = to_local(vehicle, p);
  if (local.x <= 0.0 || distance(vehicle.position(), p) <= state.arrival_distance) {
    ++state.target;
    if (state.target >= static_cast<int>(keyframes.size())) state.mode = FollowMode::Done;
  }
  return state;
}

Reachability reachability(Vec2 target, double r_min) {
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw PreconditionError("reachability: R_min must be finite and > 0");
  if (distance(target, {0.0, r_min}) < r_min) return Reachability::UnreachableLeft;
  if (distance(target, {0.0, -r_min}) < r_min) return Reachability::UnreachableRight;
  return Reachability::Reachable;
}

Controls follow_controls(const FollowerState& state, Vec2 target, const VehicleParams& params) {
  Controls c;
  if (state.mode == FollowMode::Done) return c;
  switch (reachability(target, state.r_min)) {
    case Reachability::UnreachableLeft:
      return {-params.steer_max, 0.5 * params.cruise_speed, Gear::Reverse};
    case Reachability::UnreachableRight:
      return {params.steer_max, 0.5 * params.cruise_speed, Gear::Reverse};
    case Reachability::Reachable:
      break;
  }
  const double wheelbase = state.wheelbase_map > 0.0 ? state.wheelbase_map : params.wheelbase;
  const double lookahead = std::max(norm(target), wheelbase);
  const double curvature = 2.0 * target.z / (lookahead * lookahead);
  c.steer = std::clamp(std::atan(wheelbase * curvature), -params.steer_max, params.steer_max);
  c.speed = params.cruise_speed;
  return c;
}

std::pair<FollowerState, Controls> follow_step(std::span<const Keyframe> keyframes,
                                               const Pose2& vehicle, FollowerState state,
                                               const VehicleParams& params) {
  state = select_target_keyframe(keyframes, vehicle, state);
  if (state.mode == FollowMode::Done) return {state, Controls{}};
  const Vec2 target = to_local(vehicle, keyframes[state.target].pose.position());
  switch (reachability(target, state.r_min)) {
    case Reachability::UnreachableLeft: state.mode = FollowMode::CorrectiveLeft; break;
    case Reachability::UnreachableRight: state.mode = FollowMode::CorrectiveRight; break;
    case Reachability::Reachable: state.mode = FollowMode::Follow; break;
  }
  return {state, follow_controls(state, target, params)};
}

namespace {

/// Arc leaving `p` along unit tangent `t` and ending at `q`.
std::optional<std::pair<double, double>> arc_to(Vec2 p, Vec2 t, Vec2 q) {
  const Vec2 c = q - p;
  const double len = norm(c);
  if (len <= 0.0) return std::pair{0.0, 0.0};
  const double phi = std::atan2(cross(t, c), dot(t, c));
  if (std::abs(phi) >= 0.5 * kPi) return std::nullopt;
  if (std::abs(phi) < 1e-12) return std::pair{0.0, len};
  return std::pair{2.0 * std::sin(phi) / len, len * phi / std::sin(phi)};
}

}  // namespace

std::optional<Biarc> plan_biarc(const Pose2& from, const Pose2& to) {
  const Vec2 p1 = from.position(), p2 = to.position();
  const Vec2 t1 = heading_dir(from.heading), t2 = heading_dir(to.heading);
  const Vec2 v = p2 - p1;
  const double vv = dot(v, v);
  if (vv <= 0.0) return std::nullopt;
  const double c = dot(t1, t2);
  const double vt = dot(v, t1 + t2);
  double d = 0.0;
  if (1.0 - c < 1e-12) {
    const double vt2 = dot(v, t2);
    if (vt2 <= 0.0) return std::nullopt;
    d = vv / (4.0 * vt2);
  } else {
    d = (-vt + std::sqrt(vt * vt + 2.0 * (1.0 - c) * vv)) / (2.0 * (1.0 - c));
  }
  if (!(d > 0.0)) return std::nullopt;
  const Vec2 pm = 0.5 * ((p1 + d * t1) + (p2 - d * t2));
  const auto a1 = arc_to(p1, t1, pm);
  if (!a1) return std::nullopt;
  // Tangent at the joint: start tangent turned by k1 * s1.
  const Vec2 tm = heading_dir(from.heading + a1->first * a1->second);
  const auto a2 = arc_to(pm, tm, p2);
  if (!a2) return std::nullopt;
  return Biarc{a1->first, a1->second, a2->first, a2->second};
}

const char* to_string(ParkingPhase phase) {
  switch (phase) {
    case ParkingPhase::Locate: return "locate";
    case ParkingPhase::ForwardOffset: return "forward_offset";
    case ParkingPhase::ReverseTurn: return "reverse_turn";
    case ParkingPhase::AlignStraight: return "align_straight";
    case ParkingPhase::DepthStop: return "depth_stop";
    case ParkingPhase::Done: return "done";
    case ParkingPhase::Aborted: return "aborted";
  }
  return "unknown";
}

double center_row(const ParkingSpaceHypothesis& h) {
  double s = 0.0;
  for (const CenterPoint& p : h.quad) s += p.row;
  return 0.25 * s;
}

double parking_trigger_row(const VehicleParams& params, const AvmSpec& avm, double forward_offset_m) {
  const double r = params.wheelbase / std::tan(params.steer_max);
  const double phi = forward_offset_m / r;
  // Rear-axle displacement along the initial heading after both arcs.
  const double along = r * (2.0 * std::sin(phi) - 1.0);
  const double forward_of_center = along - 0.5 * params.wheelbase;
  return 0.5 * avm.height() - 0.5 - forward_of_center / avm.resolution;
}

double forward_offset_for_row(const VehicleParams& params, const AvmSpec& avm, double row) {
  const double r = params.wheelbase / std::tan(params.steer_max);
  const double forward_of_center = (0.5 * avm.height() - 0.5 - row) * avm.resolution;
  const double along = forward_of_center + 0.5 * params.wheelbase;
  const double sin_phi = std::clamp(0.5 * (along / r + 1.0), 0.0, 1.0);
  return r * std::asin(sin_phi);
}

std::pair<ParkingFsm, Controls> parking_fsm_step(ParkingFsm fsm,
                                                 const std::optional<ParkingSpaceHypothesis>& hypothesis,
                                                 const Alignment& alignment,
                                                 const ScaleEstimate& scale, const Pose2& map_pose,
                                                 const VehicleParams& vehicle,
                                                 const ParkingParams& params) {
  const double reverse_speed = params.reverse_speed_fraction * vehicle.cruise_speed;
  const auto toward_bay = [&](BaySide side) { return side == BaySide::Left ? vehicle.steer_max : -vehicle.steer_max; };
  if (fsm.last_pose) {
    fsm.travelled_map += distance(fsm.last_pose->position(), map_pose.position());
    fsm.turned += std::abs(normalize_angle(map_pose.heading - fsm.last_pose->heading));
  }
  fsm.last_pose = map_pose;

  switch (fsm.phase) {
    case ParkingPhase::Locate:
      if (hypothesis && center_row(*hypothesis) >= params.trigger_row &&
          center_row(*hypothesis) <= params.trigger_row + params.trigger_window) {
        if (!scale.slam_to_topo) throw StateError("parking: scale must be composed before parking");
        fsm.phase = ParkingPhase::ForwardOffset;
        fsm.side = hypothesis->side;
        fsm.target = hypothesis;
        // Solved from the observed row so a late trigger frame costs nothing.
        fsm.destination_map =
            scale.metres_to_map(forward_offset_for_row(vehicle, params.avm, center_row(*hypothesis)));
        fsm.travelled_map = 0.0;
        fsm.lost_frames = 0;
        return {fsm, {-toward_bay(fsm.side), vehicle.cruise_speed, Gear::Forward}};
      }
      return {fsm, {0.0, vehicle.cruise_speed, Gear::Forward}};

    case ParkingPhase::ForwardOffset:
      fsm.lost_frames = hypothesis ? 0 : fsm.lost_frames + 1;
      if (fsm.lost_frames > params.lost_frames_limit) {
        fsm.phase = ParkingPhase::Aborted;
        return {fsm, Controls{}};
      }
      if (fsm.travelled_map >= fsm.destination_map) {
        fsm.phase = ParkingPhase::ReverseTurn;
        fsm.turned = 0.0;
        return {fsm, {toward_bay(fsm.side), reverse_speed, Gear::Reverse}};
      }
      return {fsm, {-toward_bay(fsm.side), vehicle.cruise_speed, Gear::Forward}};

    case ParkingPhase::ReverseTurn: {
      const double tol = params.slope_tol_deg;
      if (alignment.left_delta_deg && alignment.right_delta_deg &&
          std::abs(*alignment.left_delta_deg) <= tol && std::abs(*alignment.right_delta_deg) <= tol) {
        fsm.phase = ParkingPhase::AlignStraight;
        return {fsm, {0.0, 0.0, Gear::Reverse}};
      }
      if (fsm.turned > deg2rad(params.max_reverse_turn_deg)) {
        fsm.phase = ParkingPhase::Aborted;
        return {fsm, Controls{}};
      }
      return {fsm, {toward_bay(fsm.side), reverse_speed, Gear::Reverse}};
    }

    case ParkingPhase::AlignStraight:
      fsm.phase = ParkingPhase::DepthStop;
      fsm.travelled_map = 0.0;
      [[fallthrough]];

    case ParkingPhase::DepthStop:
      if (alignment.rear_gap_px && *alignment.rear_gap_px < params.gap_threshold_px) {
        fsm.phase = ParkingPhase::Done;
        return {fsm, {0.0, 0.0, Gear::Reverse}};
      }
      if (fsm.travelled_map > scale.metres_to_map(params.max_depth_travel_m)) {
        fsm.phase = ParkingPhase::Aborted;
        return {fsm, Controls{}};
      }
      return {fsm, {0.0, reverse_speed, Gear::Reverse}};

    case ParkingPhase::Done:
    case ParkingPhase::Aborted:
      return {fsm, Controls{}};
  }
  return {fsm, Controls{}};
}

}  // namespace valet
