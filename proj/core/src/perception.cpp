#include "valet/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "valet/geometry.hpp"

namespace valet {

double LineSegment2D::length() const { return std::hypot(p1.col - p0.col, p1.row - p0.row); }

double LineSegment2D::angle() const {
  double a = std::atan2(p1.row - p0.row, p1.col - p0.col);
  if (a <= -0.5 * kPi) a += kPi;
  if (a > 0.5 * kPi) a -= kPi;
  return a;
}

double LineSegment2D::at(double t) const { return intercept + slope * t; }

ResponseMap line_filter(const GrayImage& image, FilterOrientation orientation, int w) {
  if (w < 1) throw PreconditionError("line_filter: half width must be >= 1");
  const bool horizontal = orientation == FilterOrientation::Horizontal;
  const int n = horizontal ? image.width() : image.height();
  const int lines = horizontal ? image.height() : image.width();
  if (n <= 2 * w + 1) throw DimensionError("line_filter: image too small for the kernel");

  ResponseMap out(image.width(), image.height(), 0);
  std::vector<std::int64_t> prefix(static_cast<std::size_t>(n) + 1);
  for (int l = 0; l < lines; ++l) {
    prefix[0] = 0;
    for (int i = 0; i < n; ++i) {
      prefix[i + 1] = prefix[i] + (horizontal ? image.at(i, l) : image.at(l, i));
    }
    for (int i = w; i + w < n; ++i) {
      const std::int64_t ahead = prefix[i + w + 1] - prefix[i + 1];
      const std::int64_t behind = prefix[i] - prefix[i - w];
      const auto v = static_cast<std::int32_t>(ahead - behind);
      if (horizontal) {
        out.at(i, l) = v;
      } else {
        out.at(l, i) = v;
      }
    }
  }
  return out;
}

std::vector<DefinitePoint> extract_definite_points(std::span<const std::int32_t> response,
                                                   double threshold) {
  if (!(threshold > 0.0)) throw PreconditionError("extract_definite_points: threshold must be > 0");
  std::vector<DefinitePoint> out;
  const int n = static_cast<int>(response.size());
  int i = 0;
  while (i < n) {
    const double v = response[i];
    if (v > threshold || v < -threshold) {
      const bool rising = v > threshold;
      int j = i;
      while (j + 1 < n && (rising ? response[j + 1] > threshold : response[j + 1] < -threshold)) ++j;
      DefinitePoint p;
      p.col = 0.5 * (i + j);
      p.polarity = rising ? Polarity::Rising : Polarity::Falling;
      out.push_back(p);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<DefinitePoint> extract_definite_points(const ResponseMap& response,
                                                   FilterOrientation orientation, double threshold) {
  std::vector<DefinitePoint> out;
  if (orientation == FilterOrientation::Horizontal) {
    for (int r = 0; r < response.height(); ++r) {
      for (DefinitePoint p : extract_definite_points(response.row(r), threshold)) {
        p.row = r;
        p.orientation = orientation;
        out.push_back(p);
      }
    }
  } else {
    std::vector<std::int32_t> column(static_cast<std::size_t>(response.height()));
    for (int c = 0; c < response.width(); ++c) {
      for (int r = 0; r < response.height(); ++r) column[r] = response.at(c, r);
      for (DefinitePoint p : extract_definite_points(column, threshold)) {
        p.row = p.col;
        p.col = c;
        p.orientation = orientation;
        out.push_back(p);
      }
    }
  }
  return out;
}

namespace {

double scan_coord(const DefinitePoint& p) {
  return p.orientation == FilterOrientation::Horizontal ? p.col : p.row;
}

}  // namespace

std::vector<CenterPoint> pair_edges_to_centers(std::span<const DefinitePoint> points,
                                               double max_line_width) {
  std::vector<CenterPoint> out;
  std::size_t i = 0;
  while (i < points.size()) {
    if (i + 1 < points.size() && points[i].polarity == Polarity::Rising &&
        points[i + 1].polarity == Polarity::Falling &&
        scan_coord(points[i + 1]) - scan_coord(points[i]) <= max_line_width) {
      out.push_back({0.5 * (points[i].col + points[i + 1].col),
                     0.5 * (points[i].row + points[i + 1].row)});
      i += 2;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<CenterPoint> line_centers(const GrayImage& image, FilterOrientation orientation,
                                      const PerceptionParams& params) {
  const ResponseMap resp = line_filter(image, orientation, params.half_width);
  const std::vector<DefinitePoint> pts =
      extract_definite_points(resp, orientation, params.response_threshold());
  std::vector<CenterPoint> out;
  // Points are grouped by scanline in extraction order.
  std::size_t begin = 0;
  while (begin < pts.size()) {
    std::size_t end = begin + 1;
    const bool horizontal = orientation == FilterOrientation::Horizontal;
    while (end < pts.size() &&
           (horizontal ? pts[end].row == pts[begin].row : pts[end].col == pts[begin].col)) {
      ++end;
    }
    const auto centers = pair_edges_to_centers(
        std::span<const DefinitePoint>(pts.data() + begin, end - begin), params.max_line_width);
    out.insert(out.end(), centers.begin(), centers.end());
    begin = end;
  }
  return out;
}

namespace {

struct Chain {
  double n = 0, st = 0, ss = 0, stt = 0, sts = 0;
  double t_min = 0, t_max = 0;
  double last_t = 0, last_s = 0;

  void add(double t, double s) {
    if (n == 0) {
      t_min = t_max = t;
    } else {
      t_min = std::min(t_min, t);
      t_max = std::max(t_max, t);
    }
    n += 1;
    st += t;
    ss += s;
    stt += t * t;
    sts += t * s;
    last_t = t;
    last_s = s;
  }

  void merge(const Chain& o) {
    n += o.n;
    st += o.st;
    ss += o.ss;
    stt += o.stt;
    sts += o.sts;
    t_min = std::min(t_min, o.t_min);
    t_max = std::max(t_max, o.t_max);
  }

  // Least-squares s = a + b t.
  std::pair<double, double> fit() const {
    const double den = n * stt - st * st;
    if (n < 2 || std::abs(den) < 1e-9) return {ss / n, 0.0};
    const double b = (n * sts - st * ss) / den;
    return {(ss - b * st) / n, b};
  }

  double predict(double t) const {
    if (n < 2 || t_max - t_min < 1e-9) return last_s;
    const auto [a, b] = fit();
    return a + b * t;
  }
};

LineSegment2D to_segment(const Chain& c, LineAxis axis) {
  const auto [a, b] = c.fit();
  LineSegment2D seg;
  seg.axis = axis;
  seg.slope = b;
  seg.intercept = a;
  seg.inliers = static_cast<int>(c.n);
  const double s0 = a + b * c.t_min;
  const double s1 = a + b * c.t_max;
  if (axis == LineAxis::AlongRows) {
    seg.p0 = {s0, c.t_min};
    seg.p1 = {s1, c.t_max};
  } else {
    seg.p0 = {c.t_min, s0};
    seg.p1 = {c.t_max, s1};
  }
  return seg;
}

bool mergeable(const Chain& x, const Chain& y) {
  constexpr double kMaxGap = 30.0;
  constexpr double kMaxOffset = 2.0;
  const double gap = std::max(x.t_min, y.t_min) - std::min(x.t_max, y.t_max);
  if (gap > kMaxGap) return false;
  const auto [ax, bx] = x.fit();
  const auto [ay, by] = y.fit();
  if (std::abs(std::atan(bx) - std::atan(by)) > deg2rad(3.0)) return false;
  const double ty = 0.5 * (y.t_min + y.t_max);
  const double tx = 0.5 * (x.t_min + x.t_max);
  return std::abs(ax + bx * ty - (ay + by * ty)) <= kMaxOffset &&
         std::abs(ax + bx * tx - (ay + by * tx)) <= kMaxOffset;
}

}  // namespace

std::vector<LineSegment2D> fit_parking_lines(std::span<const CenterPoint> centers,
                                             const PixelRect& roi, LineAxis axis,
                                             const PerceptionParams& params) {
  std::vector<std::pair<double, double>> pts;  // (t, s)
  pts.reserve(centers.size());
  for (const CenterPoint& c : centers) {
    if (!roi.contains(c.col, c.row)) {
      throw PreconditionError("fit_parking_lines: centre outside the ROI");
    }
    pts.emplace_back(axis == LineAxis::AlongRows ? c.row : c.col,
                     axis == LineAxis::AlongRows ? c.col : c.row);
  }
  std::sort(pts.begin(), pts.end());

  std::vector<Chain> chains;
  for (const auto& [t, s] : pts) {
    int best = -1;
    double best_off = params.chain_max_offset;
    for (std::size_t k = 0; k < chains.size(); ++k) {
      const Chain& ch = chains[k];
      const double dt = t - ch.last_t;
      if (dt <= 0.0 || dt > params.chain_max_step) continue;
      const double off = std::abs(s - ch.predict(t));
      if (off <= best_off && (best < 0 || off < best_off)) {
        best = static_cast<int>(k);
        best_off = off;
      }
    }
    if (best < 0) {
      chains.emplace_back();
      chains.back().add(t, s);
    } else {
      chains[best].add(t, s);
    }
  }

  // Keep chains worth fitting, then join collinear pieces broken by gaps.
  std::vector<Chain> kept;
  for (const Chain& c : chains) {
    if (c.n >= 3) kept.push_back(c);
  }
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < kept.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < kept.size() && !merged; ++j) {
        if (mergeable(kept[i], kept[j])) {
          kept[i].merge(kept[j]);
          kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }

  std::vector<LineSegment2D> out;
  for (const Chain& c : kept) {
    if (c.n >= params.min_inliers) out.push_back(to_segment(c, axis));
  }
  std::sort(out.begin(), out.end(), [](const LineSegment2D& a, const LineSegment2D& b) {
    const auto key = [](const LineSegment2D& s) {
      const CenterPoint m = s.midpoint();
      return s.axis == LineAxis::AlongRows ? std::pair{m.col, m.row} : std::pair{m.row, m.col};
    };
    return key(a) < key(b);
  });
  return out;
}

std::optional<LineSegment2D> infer_base_line(const LineSegment2D& split_a,
                                             const LineSegment2D& split_b,
                                             std::span<const CenterPoint> centers, BaySide side,
                                             const PerceptionParams& params) {
  if (split_a.axis != LineAxis::AlongCols || split_b.axis != LineAxis::AlongCols) {
    throw PreconditionError("infer_base_line: split lines must run across the columns");
  }
  if (std::abs(split_a.angle() - split_b.angle()) > deg2rad(params.parallel_tol_deg)) {
    throw PreconditionError("infer_base_line: split lines are not parallel");
  }
  constexpr double kBandMargin = 15.0;
  const bool left = side == BaySide::Left;
  const double far_a = left ? split_a.p0.col : split_a.p1.col;
  const double far_b = left ? split_b.p0.col : split_b.p1.col;
  const double col_lo = std::min(far_a, far_b) - kBandMargin;
  const double col_hi = std::max(far_a, far_b) + kBandMargin;

  std::vector<CenterPoint> band;
  double row_lo = 1e300, row_hi = -1e300;
  for (const CenterPoint& c : centers) {
    if (c.col < col_lo || c.col > col_hi) continue;
    const double ra = split_a.at(c.col);
    const double rb = split_b.at(c.col);
    if (c.row <= std::min(ra, rb) || c.row >= std::max(ra, rb)) continue;
    band.push_back(c);
    row_lo = std::min(row_lo, c.row);
    row_hi = std::max(row_hi, c.row);
  }
  if (band.size() < static_cast<std::size_t>(params.min_inliers)) return std::nullopt;
  const PixelRect roi{static_cast<int>(std::floor(col_lo)), static_cast<int>(std::floor(row_lo)),
                      static_cast<int>(std::ceil(col_hi - std::floor(col_lo))) + 1,
                      static_cast<int>(std::ceil(row_hi - std::floor(row_lo))) + 1};
  const double split_angle = 0.5 * (split_a.angle() + split_b.angle());
  std::optional<LineSegment2D> best;
  for (LineSegment2D seg : fit_parking_lines(band, roi, LineAxis::AlongRows, params)) {
    const double diff = std::abs(normalize_angle(seg.angle() - split_angle));
    if (std::abs(diff - 0.5 * kPi) > deg2rad(params.perpendicular_tol_deg)) continue;
    if (!best || seg.inliers > best->inliers) {
      seg.role = LineRole::Base;
      best = seg;
    }
  }
  return best;
}

double match_template(const GrayImage& target, const GrayImage& templ) {
  if (target.width() != templ.width() || target.height() != templ.height()) {
    throw DimensionError("match_template: patch sizes differ");
  }
  const auto a = target.pixels();
  const auto b = templ.pixels();
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (sbb <= 0.0) throw PreconditionError("match_template: template has zero variance");
  if (saa <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

GrayImage rectify_bay(const GrayImage& avm, const std::array<CenterPoint, 4>& quad, BaySide side) {
  const CenterPoint& far_a = quad[0];
  const CenterPoint& far_b = quad[1];
  const CenterPoint& open_b = quad[2];
  const CenterPoint& open_a = quad[3];
  GrayImage out(kTemplateWidth, kTemplateHeight);
  const double span = 1.0 + 2.0 * kTemplateMargin;
  for (int r = 0; r < kTemplateHeight; ++r) {
    const double v = -kTemplateMargin + (r + 0.5) / kTemplateHeight * span;
    const double far_c = far_a.col + v * (far_b.col - far_a.col);
    const double far_r = far_a.row + v * (far_b.row - far_a.row);
    const double open_c = open_a.col + v * (open_b.col - open_a.col);
    const double open_r = open_a.row + v * (open_b.row - open_a.row);
    for (int c = 0; c < kTemplateWidth; ++c) {
      const double u = -kTemplateMargin + (c + 0.5) / kTemplateWidth * span;
      const double d = side == BaySide::Left ? u : 1.0 - u;
      const double col = far_c + d * (open_c - far_c);
      const double row = far_r + d * (open_r - far_r);
      out.at(c, r) = sample_bilinear(avm, col + 0.5, row + 0.5);
    }
  }
  return out;
}

std::vector<ParkingSpaceHypothesis> detect_empty_space(const GrayImage& avm,
                                                       const TemplateBank& templates,
                                                       const PixelRect& roi, BaySide side,
                                                       const PerceptionParams& params) {
  const auto& bank = side == BaySide::Left ? templates.left : templates.right;
  if (bank.empty()) throw PreconditionError("detect_empty_space: no templates");
  if (!roi.inside(avm.width(), avm.height())) throw DimensionError("detect_empty_space: ROI outside image");

  const GrayImage sub = crop(avm, roi);
  auto shift = [&roi](std::vector<CenterPoint> pts) {
    for (CenterPoint& p : pts) {
      p.col += roi.col0;
      p.row += roi.row0;
    }
    return pts;
  };
  const auto across = shift(line_centers(sub, FilterOrientation::Vertical, params));
  const auto along = shift(line_centers(sub, FilterOrientation::Horizontal, params));

  std::vector<LineSegment2D> splits;
  for (LineSegment2D s : fit_parking_lines(across, roi, LineAxis::AlongCols, params)) {
    if (std::abs(s.angle()) > deg2rad(2.0 * params.parallel_tol_deg)) continue;
    if (s.length() < params.min_split_length) continue;
    s.role = LineRole::Split;
    splits.push_back(s);
  }

  std::vector<ParkingSpaceHypothesis> out;
  for (std::size_t i = 0; i + 1 < splits.size(); ++i) {
    const LineSegment2D& a = splits[i];
    const LineSegment2D& b = splits[i + 1];
    if (std::abs(a.angle() - b.angle()) > deg2rad(params.parallel_tol_deg)) continue;
    const double lo = std::max(a.p0.col, b.p0.col);
    const double hi = std::min(a.p1.col, b.p1.col);
    const double shorter = std::min(a.p1.col - a.p0.col, b.p1.col - b.p0.col);
    if (hi - lo < 0.5 * shorter) continue;
    const double mid = 0.5 * (lo + hi);
    const double sep = b.at(mid) - a.at(mid);
    if (sep < params.min_bay_width || sep > params.max_bay_width) continue;

    ParkingSpaceHypothesis h;
    h.split_a = a;
    h.split_b = b;
    h.side = side;
    h.base = infer_base_line(a, b, along, side, params);
    const bool left = side == BaySide::Left;
    double far_a = left ? a.p0.col : a.p1.col;
    double far_b = left ? b.p0.col : b.p1.col;
    if (h.base) {
      // Base line runs along rows: col = f(row).
      far_a = h.base->at(a.at(h.base->at(a.at(far_a))));
      far_b = h.base->at(b.at(h.base->at(b.at(far_b))));
    }
    const double open_a = left ? a.p1.col : a.p0.col;
    const double open_b = left ? b.p1.col : b.p0.col;
    h.quad = {CenterPoint{far_a, a.at(far_a)}, CenterPoint{far_b, b.at(far_b)},
              CenterPoint{open_b, b.at(open_b)}, CenterPoint{open_a, a.at(open_a)}};
    const GrayImage patch = rectify_bay(avm, h.quad, side);
    for (const GrayImage& t : bank) h.score = std::max(h.score, match_template(patch, t));
    if (h.score >= params.accept_threshold) out.push_back(h);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ParkingSpaceHypothesis& x, const ParkingSpaceHypothesis& y) {
                     return x.score > y.score;
                   });
  return out;
}

ArrowObservation classify_arrow(const GrayImage& front, const PerceptionParams& params) {
  ArrowObservation obs;
  if (front.height() <= 2 * params.half_width + 1) return obs;
  const ResponseMap resp = line_filter(front, FilterOrientation::Vertical, params.half_width);
  const auto points =
      extract_definite_points(resp, FilterOrientation::Vertical, params.response_threshold());

  PerceptionParams edge_params = params;
  edge_params.min_inliers = params.arrow_min_edge_points;
  const PixelRect roi{0, 0, front.width(), front.height()};
  std::vector<ArrowEdge> edges;
  for (Polarity pol : {Polarity::Rising, Polarity::Falling}) {
    std::vector<CenterPoint> pts;
    for (const DefinitePoint& p : points) {
      if (p.polarity == pol) pts.push_back({p.col, p.row});
    }
    for (const LineSegment2D& seg : fit_parking_lines(pts, roi, LineAxis::AlongCols, edge_params)) {
      const double ang = rad2deg(std::abs(seg.angle()));
      if (ang < params.arrow_min_angle_deg || ang > params.arrow_max_angle_deg) continue;
      // Rows grow downward, so a segment rising to the right has a negative row slope.
      edges.push_back({seg.midpoint(), seg.slope < 0.0 ? 1 : -1, seg.length()});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const ArrowEdge& x, const ArrowEdge& y) {
    if (x.length != y.length) return x.length > y.length;
    if (x.center.col != y.center.col) return x.center.col < y.center.col;
    return x.center.row < y.center.row;
  });
  if (edges.size() < 2) return obs;
  const ArrowEdge& e0 = edges[0];
  const ArrowEdge& e1 = edges[1];
  if (e0.slope_sign == e1.slope_sign) return obs;
  const ArrowEdge& pos = e0.slope_sign > 0 ? e0 : e1;
  const ArrowEdge& neg = e0.slope_sign > 0 ? e1 : e0;
  obs.positive_edge = pos;
  obs.negative_edge = neg;
  if (pos.center.row < neg.center.row) {
    obs.direction = ArrowDirection::Left;
  } else if (pos.center.row > neg.center.row) {
    obs.direction = ArrowDirection::Right;
  }
  return obs;
}

std::pair<DebounceState, std::optional<TurnCommand>> debounce_arrow(DebounceState state,
                                                                    const ArrowObservation& obs) {
  if (state.rotating || !obs.direction) {
    state.last.reset();
    state.count = 0;
    state.fired = false;
    return {state, std::nullopt};
  }
  if (state.last == obs.direction) {
    ++state.count;
  } else {
    state.last = obs.direction;
    state.count = 1;
    state.fired = false;
  }
  if (state.count > kDebounceFrames && !state.fired) {
    state.fired = true;
    return {state, TurnCommand{*obs.direction}};
  }
  return {state, std::nullopt};
}

namespace {

std::optional<LineSegment2D> nearest_vertical_line(const GrayImage& img, bool prefer_high_col,
                                                   const PerceptionParams& params) {
  if (img.width() <= 2 * params.half_width + 1) return std::nullopt;
  const auto centers = line_centers(img, FilterOrientation::Horizontal, params);
  const PixelRect roi{0, 0, img.width(), img.height()};
  std::optional<LineSegment2D> best;
  for (const LineSegment2D& seg : fit_parking_lines(centers, roi, LineAxis::AlongRows, params)) {
    const double col = seg.midpoint().col;
    if (!best || (prefer_high_col ? col > best->midpoint().col : col < best->midpoint().col)) {
      best = seg;
    }
  }
  return best;
}

}  // namespace

std::pair<std::optional<double>, std::optional<double>> measure_side_slopes(
    const GrayImage& left, const GrayImage& right, const PerceptionParams& params) {
  std::pair<std::optional<double>, std::optional<double>> out;
  if (auto l = nearest_vertical_line(left, true, params)) out.first = rad2deg(std::atan(l->slope));
  if (auto r = nearest_vertical_line(right, false, params)) out.second = rad2deg(std::atan(r->slope));
  return out;
}

Alignment measure_alignment(const GrayImage& left, const GrayImage& right, const GrayImage& rear,
                            const ReferenceSlopes& reference, const PerceptionParams& params) {
  Alignment out;
  const auto [l, r] = measure_side_slopes(left, right, params);
  if (l) out.left_delta_deg = *l - reference.left_deg;
  if (r) out.right_delta_deg = *r - reference.right_deg;

  if (rear.height() > 2 * params.half_width + 1) {
    const auto centers = line_centers(rear, FilterOrientation::Vertical, params);
    const PixelRect roi{0, 0, rear.width(), rear.height()};
    for (const LineSegment2D& seg : fit_parking_lines(centers, roi, LineAxis::AlongCols, params)) {
      if (std::abs(seg.angle()) > deg2rad(30.0)) continue;
      if (seg.length() < 0.5 * params.min_split_length) continue;
      const double gap = seg.midpoint().row;
      if (!out.rear_gap_px || gap < *out.rear_gap_px) out.rear_gap_px = gap;
    }
  }
  return out;
}

namespace {

void draw_segment(RgbImage& img, CenterPoint a, CenterPoint b, Rgb color) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(b.col - a.col), std::abs(b.row - a.row)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int c = static_cast<int>(std::lround(a.col + t * (b.col - a.col)));
    const int r = static_cast<int>(std::lround(a.row + t * (b.row - a.row)));
    if (img.in_bounds(c, r)) img.at(c, r) = color;
  }
}

}  // namespace

RgbImage draw_overlay(const GrayImage& image, std::span<const ParkingSpaceHypothesis> spaces,
                      std::span<const DefinitePoint> points) {
  constexpr Rgb kRed{255, 0, 0};
  constexpr Rgb kGreen{0, 255, 0};
  constexpr Rgb kBlue{0, 0, 255};
  RgbImage out = to_rgb(image);
  for (const DefinitePoint& p : points) {
    const int c = static_cast<int>(std::lround(p.col));
    const int r = static_cast<int>(std::lround(p.row));
    if (out.in_bounds(c, r)) out.at(c, r) = kBlue;
  }
  for (const ParkingSpaceHypothesis& h : spaces) {
    draw_segment(out, h.split_a.p0, h.split_a.p1, kRed);
    draw_segment(out, h.split_b.p0, h.split_b.p1, kRed);
    if (h.base) draw_segment(out, h.base->p0, h.base->p1, kGreen);
  }
  return out;
}

}  // namespace valet
