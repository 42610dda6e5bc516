#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "valet/image.hpp"
#include "valet/turn_command.hpp"

namespace valet {

enum class FilterOrientation {
  Horizontal,  ///< kernel runs along each row; responds to vertical edges
  Vertical,    ///< kernel runs along each column; responds to horizontal edges
};

enum class Polarity { Rising, Falling };

struct DefinitePoint {
  double col = 0.0;
  double row = 0.0;
  Polarity polarity = Polarity::Rising;
  FilterOrientation orientation = FilterOrientation::Horizontal;
};

struct CenterPoint {
  double col = 0.0;
  double row = 0.0;
};

/// Which image axis a line family runs along.
enum class LineAxis {
  AlongRows,  ///< near-vertical lines, parametrised as col = f(row)
  AlongCols,  ///< near-horizontal lines, parametrised as row = f(col)
};

enum class LineRole { Split, Base, Scale, Unknown };

struct LineSegment2D {
  CenterPoint p0;  ///< endpoint with the smaller parameter (row or col)
  CenterPoint p1;
  double slope = 0.0;  ///< d(col)/d(row) for AlongRows, d(row)/d(col) for AlongCols
  double intercept = 0.0;
  int inliers = 0;
  LineAxis axis = LineAxis::AlongRows;
  LineRole role = LineRole::Unknown;

  double length() const;
  CenterPoint midpoint() const { return {0.5 * (p0.col + p1.col), 0.5 * (p0.row + p1.row)}; }
  /// Orientation in image coordinates, radians in (-pi/2, pi/2], measured from the
  /// +col axis with rows pointing down.
  double angle() const;
  /// Line coordinate (col for AlongRows, row for AlongCols) at parameter t.
  double at(double t) const;
};

enum class BaySide { Left, Right };

struct ParkingSpaceHypothesis {
  LineSegment2D split_a;  ///< split line with the smaller across-bay coordinate
  LineSegment2D split_b;
  std::optional<LineSegment2D> base;
  /// Far-end corners then opening corners: far_a, far_b, open_b, open_a (AVM pixels).
  std::array<CenterPoint, 4> quad;
  double score = -1.0;
  BaySide side = BaySide::Left;
};

struct ArrowEdge {
  CenterPoint center;
  int slope_sign = 0;  ///< sign of the edge slope with the image y axis pointing up
  double length = 0.0;
};

struct ArrowObservation {
  std::optional<ArrowDirection> direction;
  std::optional<ArrowEdge> positive_edge;
  std::optional<ArrowEdge> negative_edge;
};

struct DebounceState {
  std::optional<ArrowDirection> last;
  int count = 0;
  bool rotating = false;
  bool fired = false;  ///< a command was already emitted for the current run
};

struct PerceptionParams {
  int half_width = 6;            ///< line-filter half width, px
  double edge_contrast = 30.0;   ///< per-pixel contrast (levels) for definite points
  double max_line_width = 14.0;  ///< px, rising/falling pairing gate
  int min_inliers = 8;
  double chain_max_step = 3.0;   ///< max gap along the line axis between chained points, px
  double chain_max_offset = 2.0; ///< max offset from the chain's predicted continuation, px
  double parallel_tol_deg = 10.0;
  double perpendicular_tol_deg = 10.0;
  double min_split_length = 40.0;  ///< px
  double min_bay_width = 30.0;     ///< px between paired split lines
  double max_bay_width = 120.0;
  double accept_threshold = 0.6;
  double arrow_min_angle_deg = 20.0;
  double arrow_max_angle_deg = 70.0;
  int arrow_min_edge_points = 8;

  double response_threshold() const { return edge_contrast * half_width; }
};

/// Antisymmetric box-gradient filter [-1 x w, 0, +1 x w]. Responses where the
/// kernel overhangs the image are zero.
ResponseMap line_filter(const GrayImage& image, FilterOrientation orientation, int half_width);

/// Runs of |response| > threshold along one scanline; each run yields its
/// median coordinate. `response` is indexed by the scan coordinate.
std::vector<DefinitePoint> extract_definite_points(std::span<const std::int32_t> response,
                                                   double threshold);

/// Definite points of a whole response map, positions in image coordinates.
std::vector<DefinitePoint> extract_definite_points(const ResponseMap& response,
                                                   FilterOrientation orientation, double threshold);

/// Pairs each rising point with an immediately following falling point no
/// further than `max_line_width`. `points` must come from one scanline and be
/// sorted by scan coordinate.
std::vector<CenterPoint> pair_edges_to_centers(std::span<const DefinitePoint> points,
                                               double max_line_width);

/// Line centres of an image: filter, definite points and pairing per scanline.
std::vector<CenterPoint> line_centers(const GrayImage& image, FilterOrientation orientation,
                                      const PerceptionParams& params);

/// Greedy chaining of centres along `axis` followed by least-squares fits.
/// Chains with fewer than `min_inliers` points are discarded.
std::vector<LineSegment2D> fit_parking_lines(std::span<const CenterPoint> centers,
                                             const PixelRect& roi, LineAxis axis,
                                             const PerceptionParams& params);

/// Looks for a segment roughly perpendicular to two parallel split lines near
/// their far ends. Throws PreconditionError when the splits are not parallel.
std::optional<LineSegment2D> infer_base_line(const LineSegment2D& split_a,
                                             const LineSegment2D& split_b,
                                             std::span<const CenterPoint> centers, BaySide side,
                                             const PerceptionParams& params);

/// Zero-mean normalised cross-correlation of equally sized patches, in [-1, 1].
/// A zero-variance target scores 0; a zero-variance template is an error.
double match_template(const GrayImage& target, const GrayImage& templ);

struct TemplateBank {
  std::vector<GrayImage> left;
  std::vector<GrayImage> right;
};

inline constexpr int kTemplateWidth = 64;
inline constexpr int kTemplateHeight = 40;
inline constexpr double kTemplateMargin = 0.15;

/// U-shaped and two-line bays at three line-width scales for both sides.
TemplateBank make_template_bank();

/// Resamples the hypothesis quadrilateral (plus margin) into template frame.
GrayImage rectify_bay(const GrayImage& avm, const std::array<CenterPoint, 4>& quad, BaySide side);

/// Full chain from AVM image to scored hypotheses (score >= accept_threshold),
/// sorted by decreasing score. Split lines are expected to run across the
/// image columns (side-looking bays).
std::vector<ParkingSpaceHypothesis> detect_empty_space(const GrayImage& avm,
                                                       const TemplateBank& templates,
                                                       const PixelRect& roi, BaySide side,
                                                       const PerceptionParams& params);

/// Applies the head-edge rule to a top-down image of the area in front of the vehicle.
ArrowObservation classify_arrow(const GrayImage& front, const PerceptionParams& params);

/// Consecutive-frame filter; emits once when a run first exceeds 10 frames.
std::pair<DebounceState, std::optional<TurnCommand>> debounce_arrow(DebounceState state,
                                                                    const ArrowObservation& obs);
inline constexpr int kDebounceFrames = 10;

struct ReferenceSlopes {
  double left_deg = 0.0;
  double right_deg = 0.0;
};

struct Alignment {
  std::optional<double> left_delta_deg;
  std::optional<double> right_delta_deg;
  std::optional<double> rear_gap_px;
};

/// Side images: the split line nearest the vehicle edge (the image's right
/// edge for the left view, left edge for the right view). Rear image: row 0 is
/// the vehicle's rear edge; the gap is the distance to the nearest base line.
Alignment measure_alignment(const GrayImage& left, const GrayImage& right, const GrayImage& rear,
                            const ReferenceSlopes& reference, const PerceptionParams& params);

/// Slopes (degrees from the row axis) of the nearest split lines in each side view.
std::pair<std::optional<double>, std::optional<double>> measure_side_slopes(
    const GrayImage& left, const GrayImage& right, const PerceptionParams& params);

/// Overlay with split lines red, base lines green and definite points blue.
RgbImage draw_overlay(const GrayImage& image, std::span<const ParkingSpaceHypothesis> spaces,
                      std::span<const DefinitePoint> points);

}  // namespace valet
