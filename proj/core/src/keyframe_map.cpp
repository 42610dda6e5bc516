#include "valet/keyframe_map.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "valet/errors.hpp"

namespace valet {

void OdometryModel::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("odometry.scale must be > 0");
  if (!(translation_noise >= 0.0)) throw ConfigError("odometry.translation_noise must be >= 0");
  if (!(heading_noise >= 0.0)) throw ConfigError("odometry.heading_noise must be >= 0");
}

Pose2 observe_pose(const OdometryModel& model, std::mt19937_64& rng, const Pose2& true_pose,
                   const Pose2& previous_map, const Pose2& previous_true) {
  Vec2 delta = to_local(previous_true, true_pose.position());
  double dh = normalize_angle(true_pose.heading - previous_true.heading);
  if (delta.x != 0.0 || delta.z != 0.0 || dh != 0.0) {
    if (model.translation_noise > 0.0) {
      std::normal_distribution<double> n(0.0, model.translation_noise);
      delta.x += n(rng);
      delta.z += n(rng);
    }
    if (model.heading_noise > 0.0) {
      std::normal_distribution<double> n(0.0, model.heading_noise);
      dh += n(rng);
    }
  }
  const Vec2 p = to_world(previous_map, model.scale * delta);
  return {p.x, p.z, normalize_angle(previous_map.heading + dh)};
}

Odometry::Odometry(const OdometryModel& model, const Pose2& initial_true)
    : model_(model),
      rng_(model.seed),
      map_{model.scale * initial_true.x, model.scale * initial_true.z, initial_true.heading},
      true_(initial_true) {
  model_.validate();
}

Pose2 Odometry::observe(const Pose2& true_pose) {
  map_ = observe_pose(model_, rng_, true_pose, map_, true_);
  true_ = true_pose;
  return map_;
}

KeyframeParams KeyframeParams::for_scale(double scale) {
  KeyframeParams p;
  p.d_kf = 0.4 * scale;
  p.r_loop = 2.0 * p.d_kf;
  p.l_min = 4.0 * p.r_loop;
  return p;
}

void KeyframeParams::validate() const {
  if (!(d_kf > 0.0)) throw ConfigError("keyframe d_kf must be > 0");
  if (!(theta_kf > 0.0)) throw ConfigError("keyframe theta_kf must be > 0");
  if (!(r_loop > 0.0)) throw ConfigError("keyframe r_loop must be > 0");
  if (!(l_min >= 0.0)) throw ConfigError("keyframe l_min must be >= 0");
}

KeyframeMap::KeyframeMap(KeyframeParams params) : params_(params) { params_.validate(); }

void KeyframeMap::append(const Pose2& pose) {
  keyframes_.push_back({static_cast<int>(keyframes_.size()), pose, path_length_});
}

bool KeyframeMap::maybe_create_keyframe(const Pose2& map_pose) {
  if (last_pose_) path_length_ += distance(last_pose_->position(), map_pose.position());
  last_pose_ = map_pose;
  if (keyframes_.empty()) {
    append(map_pose);
    return true;
  }
  const Pose2& last = keyframes_.back().pose;
  const bool moved = distance(last.position(), map_pose.position()) >= params_.d_kf;
  const bool turned = std::abs(normalize_angle(map_pose.heading - last.heading)) >= params_.theta_kf;
  if (moved || turned) {
    append(map_pose);
    return true;
  }
  return false;
}

bool KeyframeMap::detect_loop_closure(const Pose2& map_pose) {
  if (loop_detected_ || keyframes_.empty()) return false;
  if (path_length_ < params_.l_min) return false;
  if (distance(map_pose.position(), keyframes_.front().pose.position()) > params_.r_loop) return false;
  loop_detected_ = true;
  return true;
}

void KeyframeMap::close_loop(const Pose2& closing_pose) {
  if (keyframes_.empty()) throw StateError("close_loop: map is empty");
  close_loop(closing_pose, keyframes_.front().pose);
}

void KeyframeMap::close_loop(const Pose2& closing_pose, const Pose2& matched_pose) {
  if (!loop_detected_) throw StateError("close_loop: no loop closure has been detected");
  if (loop_closed_) throw StateError("close_loop: loop already closed");
  if (!(keyframes_.back().pose == closing_pose)) append(closing_pose);

  const Pose2 e{closing_pose.x - matched_pose.x, closing_pose.z - matched_pose.z,
                normalize_angle(closing_pose.heading - matched_pose.heading)};
  const double total = keyframes_.back().path_length;
  if (total > 0.0) {
    for (Keyframe& kf : keyframes_) {
      const double t = kf.path_length / total;
      kf.pose.x -= t * e.x;
      kf.pose.z -= t * e.z;
      kf.pose.heading = normalize_angle(kf.pose.heading - t * e.heading);
    }
  }
  closing_error_ = e;
  loop_closed_ = true;
}

std::optional<Pose2> KeyframeMap::start_pose() const {
  if (keyframes_.empty()) return std::nullopt;
  return keyframes_.front().pose;
}

void write_map_dump(const KeyframeMap& map, std::ostream& out) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(9);
  for (const Keyframe& kf : map.keyframes()) {
    out << kf.id << ' ' << kf.pose.x << ' ' << kf.pose.z << ' ' << kf.pose.heading << '\n';
  }
  if (map.loop_closed()) out << "# loop_closed\n";
  out.flags(flags);
  out.precision(prec);
}

double estimate_slam_aerial_scale(std::span<const CrossingEvent> events,
                                  double aerial_separation_px) {
  if (events.size() < 2) throw EstimationError("scale: two scale-line crossings are required");
  if (!(aerial_separation_px > 0.0)) throw EstimationError("scale: aerial separation must be > 0");
  const double map_sep = distance(events[0].map_pose.position(), events[1].map_pose.position());
  if (!(map_sep > 0.0)) throw EstimationError("scale: crossing events coincide");
  return map_sep / aerial_separation_px;
}

double estimate_aerial_topo_scale(double detected_px, double actual_m) {
  if (!(detected_px > 0.0)) throw EstimationError("scale: detected line length must be > 0");
  if (!(actual_m > 0.0)) throw EstimationError("scale: actual line length must be > 0");
  return actual_m / detected_px;
}

void ScaleEstimate::compose() {
  if (!slam_to_aerial || !aerial_to_topo) throw EstimationError("scale: partial scales not set");
  slam_to_topo = *aerial_to_topo / *slam_to_aerial;
}

double ScaleEstimate::metres_to_map(double metres) const {
  if (!slam_to_topo) throw EstimationError("scale: estimate not composed");
  return metres / *slam_to_topo;
}

}  // namespace valet
