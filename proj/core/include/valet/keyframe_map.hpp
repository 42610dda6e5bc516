#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "valet/geometry.hpp"

namespace valet {

/// Noisy odometry with an unknown global scale, standing in for visual SLAM.
struct OdometryModel {
  double scale = 1.0;              ///< map units per metre
  double translation_noise = 0.0;  ///< per-step std, metres, on each body axis
  double heading_noise = 0.0;      ///< per-step std, radians
  std::uint64_t seed = 0;

  void validate() const;
};

/// Advances `previous_map` by the body-frame motion from `previous_true` to
/// `true_pose`, scaled by the model and perturbed with draws from `rng`.
/// A step without motion draws no noise.
Pose2 observe_pose(const OdometryModel& model, std::mt19937_64& rng, const Pose2& true_pose,
                   const Pose2& previous_map, const Pose2& previous_true);

/// Stateful wrapper holding the RNG stream and the last poses.
class Odometry {
 public:
  Odometry(const OdometryModel& model, const Pose2& initial_true);

  Pose2 observe(const Pose2& true_pose);
  const Pose2& map_pose() const { return map_; }
  const OdometryModel& model() const { return model_; }

 private:
  OdometryModel model_;
  std::mt19937_64 rng_;
  Pose2 map_;
  Pose2 true_;
};

struct Keyframe {
  int id = 0;
  Pose2 pose;                ///< map units
  double path_length = 0.0;  ///< map-frame distance travelled when created
};

struct KeyframeParams {
  double d_kf = 0.4;                 ///< map units
  double theta_kf = deg2rad(10.0);
  double r_loop = 0.8;
  double l_min = 3.2;

  /// Defaults for a map with `scale` units per metre.
  static KeyframeParams for_scale(double scale);
  void validate() const;
};

class KeyframeMap {
 public:
  explicit KeyframeMap(KeyframeParams params = {});

  /// Accumulates path length and appends a keyframe when the spacing gate
  /// opens. Returns true if a keyframe was created.
  bool maybe_create_keyframe(const Pose2& map_pose);

  /// True once, when the pose is back within r_loop of the start after at
  /// least l_min of travel.
  bool detect_loop_closure(const Pose2& map_pose);

  /// Distributes the closing error (closing - start) linearly along path length.
  void close_loop(const Pose2& closing_pose);
  /// Same, with the error measured against an externally matched pose.
  void close_loop(const Pose2& closing_pose, const Pose2& matched_pose);

  const std::vector<Keyframe>& keyframes() const { return keyframes_; }
  const KeyframeParams& params() const { return params_; }
  bool loop_detected() const { return loop_detected_; }
  bool loop_closed() const { return loop_closed_; }
  double path_length() const { return path_length_; }
  std::optional<Pose2> start_pose() const;
  /// Error removed at the closing end (zero before closing).
  const Pose2& closing_error() const { return closing_error_; }

 private:
  void append(const Pose2& pose);

  KeyframeParams params_;
  std::vector<Keyframe> keyframes_;
  std::optional<Pose2> last_pose_;
  double path_length_ = 0.0;
  bool loop_detected_ = false;
  bool loop_closed_ = false;
  Pose2 closing_error_;
};

/// `id x z heading` per keyframe in creation order, then `# loop_closed` if closed.
void write_map_dump(const KeyframeMap& map, std::ostream& out);

struct CrossingEvent {
  Pose2 map_pose;
  double avm_row = 0.0;  ///< row at which the scale line was detected
};

/// Map units per AVM pixel from two scale-line crossings separated by
/// `aerial_separation_px` in the aerial image.
double estimate_slam_aerial_scale(std::span<const CrossingEvent> events,
                                  double aerial_separation_px);

/// Metres per AVM pixel from a detected parking-line length.
double estimate_aerial_topo_scale(double detected_px, double actual_m);

struct ScaleEstimate {
  std::optional<double> slam_to_aerial;  ///< map units per pixel
  std::optional<double> aerial_to_topo;  ///< metres per pixel
  std::optional<double> slam_to_topo;    ///< metres per map unit

  /// Fills slam_to_topo; throws EstimationError if a partial scale is missing.
  void compose();
  /// Converts metres to map units; requires a composed estimate.
  double metres_to_map(double metres) const;
};

}  // namespace valet
