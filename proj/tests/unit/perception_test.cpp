#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "valet/errors.hpp"
#include "valet/perception.hpp"
#include "valet/sim.hpp"
#include "valet/world.hpp"

namespace valet {
namespace {

GrayImage step_image(int width, int height, int step_col, std::uint8_t dark, std::uint8_t bright) {
  GrayImage img(width, height, dark);
  for (int r = 0; r < height; ++r) {
    for (int c = step_col; c < width; ++c) img.at(c, r) = bright;
  }
  return img;
}

TEST(LineFilterTest, ConstantImageIsZero) {
  const GrayImage img(50, 40, 93);
  for (auto o : {FilterOrientation::Horizontal, FilterOrientation::Vertical}) {
    const ResponseMap r = line_filter(img, o, 4);
    for (auto v : r.pixels()) ASSERT_EQ(v, 0);
  }
}

TEST(LineFilterTest, StepMatchesHandConvolution) {
  const int w = 3;
  const GrayImage img = step_image(30, 2, 12, 20, 120);
  const ResponseMap r = line_filter(img, FilterOrientation::Horizontal, w);
  std::int32_t best = 0;
  for (int c = 0; c < 30; ++c) {
    std::int32_t expect = 0;
    if (c >= w && c + w < 30) {
      for (int k = 1; k <= w; ++k) expect += img.at(c + k, 0) - img.at(c - k, 0);
    }
    EXPECT_EQ(r.at(c, 0), expect) << "col " << c;
    best = std::max(best, expect);
  }
  EXPECT_EQ(r.at(12, 0), best);
  EXPECT_EQ(best, w * 100);
}

TEST(LineFilterTest, StripeGivesPeakThenValley) {
  const int w = 4;
  GrayImage img(60, 1, 50);
  for (int c = 30; c < 30 + 2 * w; ++c) img.at(c, 0) = 200;
  const ResponseMap r = line_filter(img, FilterOrientation::Horizontal, w);
  const auto row = r.row(0);
  const auto mx = std::max_element(row.begin(), row.end()) - row.begin();
  const auto mn = std::min_element(row.begin(), row.end()) - row.begin();
  // Two-pixel plateaus straddle each edge: peak at 29-30, valley at 37-38.
  EXPECT_EQ(mx, 29);
  EXPECT_EQ(mn, 29 + 2 * w);
  EXPECT_EQ(row[29], w * 150);
  EXPECT_EQ(row[30], w * 150);
  EXPECT_EQ(row[29 + 2 * w], -w * 150);
  EXPECT_EQ(row[30 + 2 * w], -w * 150);
  EXPECT_LT(row[28], w * 150);
  EXPECT_GT(row[31 + 2 * w], -w * 150);
}

TEST(LineFilterTest, VerticalMatchesTransposedHorizontal) {
  GrayImage img(40, 30);
  for (int r = 0; r < 30; ++r) {
    for (int c = 0; c < 40; ++c) img.at(c, r) = static_cast<std::uint8_t>((c * 7 + r * r * 3) % 251);
  }
  const ResponseMap v = line_filter(img, FilterOrientation::Vertical, 3);
  const ResponseMap h = line_filter(transpose(img), FilterOrientation::Horizontal, 3);
  for (int r = 0; r < 30; ++r) {
    for (int c = 0; c < 40; ++c) ASSERT_EQ(v.at(c, r), h.at(r, c));
  }
}

TEST(LineFilterTest, TooSmallImageThrows) {
  EXPECT_THROW(line_filter(GrayImage(7, 10), FilterOrientation::Horizontal, 3), DimensionError);
  EXPECT_THROW(line_filter(GrayImage(20, 20), FilterOrientation::Horizontal, 0), PreconditionError);
}

TEST(DefinitePointTest, RunMedian) {
  std::vector<std::int32_t> resp(30, 0);
  for (int i = 10; i <= 14; ++i) resp[i] = 50;
  const auto pts = extract_definite_points(resp, 10.0);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].col, 12.0);
  EXPECT_EQ(pts[0].polarity, Polarity::Rising);
}

TEST(DefinitePointTest, BelowThresholdIsEmpty) {
  std::vector<std::int32_t> resp(30, 9);
  resp[3] = -10;
  EXPECT_TRUE(extract_definite_points(resp, 10.0).empty());
}

TEST(DefinitePointTest, StripeGivesRisingThenFalling) {
  const int w = 5;
  GrayImage img(200, 1, 40);
  for (int c = 100; c < 110; ++c) img.at(c, 0) = 200;
  const ResponseMap r = line_filter(img, FilterOrientation::Horizontal, w);
  const auto pts = extract_definite_points(r.row(0), 0.5 * w * 160);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].polarity, Polarity::Rising);
  EXPECT_EQ(pts[1].polarity, Polarity::Falling);
  // Peak run is symmetric about the rising edge at 99.5, valley about 109.5.
  EXPECT_NEAR(pts[0].col, 99.5, 0.5);
  EXPECT_NEAR(pts[1].col, 109.5, 0.5);
}

DefinitePoint pt(double col, Polarity p) {
  DefinitePoint d;
  d.col = col;
  d.polarity = p;
  return d;
}

TEST(PairEdgesTest, Midpoint) {
  const std::vector<DefinitePoint> pts{pt(100, Polarity::Rising), pt(110, Polarity::Falling)};
  const auto c = pair_edges_to_centers(pts, 20);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].col, 105.0);
}

TEST(PairEdgesTest, WidthGate) {
  const std::vector<DefinitePoint> pts{pt(100, Polarity::Rising), pt(160, Polarity::Falling)};
  EXPECT_TRUE(pair_edges_to_centers(pts, 20).empty());
}

TEST(PairEdgesTest, OnlyAdjacentPairs) {
  const std::vector<DefinitePoint> pts{pt(100, Polarity::Rising), pt(104, Polarity::Rising),
                                       pt(110, Polarity::Falling)};
  const auto c = pair_edges_to_centers(pts, 20);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].col, 107.0);
}

TEST(FitLinesTest, CollinearCentersGiveExactSlope) {
  std::vector<CenterPoint> centers;
  for (int i = 0; i < 30; ++i) centers.push_back({100.0 + 0.25 * i, 50.0 + i});
  const PerceptionParams p;
  const auto segs = fit_parking_lines(centers, {0, 0, 300, 300}, LineAxis::AlongRows, p);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_NEAR(segs[0].slope, 0.25, 1e-6);
  EXPECT_EQ(segs[0].inliers, 30);
}

TEST(FitLinesTest, ParallelStripesThroughChain) {
  GrayImage img(200, 120, 60);
  for (int r = 10; r < 110; ++r) {
    for (int c = 60; c < 66; ++c) img.at(c, r) = 200;
    for (int c = 100; c < 106; ++c) img.at(c, r) = 200;
  }
  const PerceptionParams p;
  const auto centers = line_centers(img, FilterOrientation::Horizontal, p);
  auto segs = fit_parking_lines(centers, {0, 0, 200, 120}, LineAxis::AlongRows, p);
  ASSERT_EQ(segs.size(), 2u);
  std::sort(segs.begin(), segs.end(),
            [](const auto& a, const auto& b) { return a.midpoint().col < b.midpoint().col; });
  EXPECT_NEAR(segs[1].midpoint().col - segs[0].midpoint().col, 40.0, 1.0);
}

TEST(FitLinesTest, ScatteredPointsAreGated) {
  const std::vector<CenterPoint> centers{{10, 10}, {80, 40}, {150, 90}};
  PerceptionParams p;
  p.min_inliers = 8;
  EXPECT_TRUE(fit_parking_lines(centers, {0, 0, 200, 200}, LineAxis::AlongRows, p).empty());
}

TEST(BaseLineTest, NonParallelSplitsThrow) {
  LineSegment2D a;
  a.axis = LineAxis::AlongCols;
  a.p0 = {100, 100};
  a.p1 = {200, 100};
  LineSegment2D b = a;
  b.p0 = {100, 140};
  b.p1 = {200, 140 + 100 * std::tan(deg2rad(30.0))};
  b.slope = std::tan(deg2rad(30.0));
  b.intercept = 140 - 100 * b.slope;
  EXPECT_THROW(infer_base_line(a, b, {}, BaySide::Left, PerceptionParams{}), PreconditionError);
}

TEST(TemplateMatchTest, IdentityAndInverse) {
  GrayImage a(16, 12);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 16; ++c) a.at(c, r) = static_cast<std::uint8_t>((c * 13 + r * 29) % 200 + 20);
  }
  GrayImage inv = a;
  for (auto& v : inv.pixels()) v = static_cast<std::uint8_t>(255 - v);
  EXPECT_NEAR(match_template(a, a), 1.0, 1e-12);
  EXPECT_NEAR(match_template(inv, a), -1.0, 1e-12);
}

TEST(TemplateMatchTest, ShiftLowersScore) {
  const TemplateBank bank = make_template_bank();
  const GrayImage& t = bank.left.front();
  GrayImage shifted(t.width(), t.height());
  for (int r = 0; r < t.height(); ++r) {
    for (int c = 0; c < t.width(); ++c) shifted.at(c, r) = t.at(std::max(0, c - 3), r);
  }
  EXPECT_LT(match_template(shifted, t), match_template(t, t));
}

TEST(TemplateMatchTest, DegenerateTemplateThrows) {
  const GrayImage flat(8, 8, 50);
  GrayImage var(8, 8, 50);
  var.at(3, 3) = 90;
  EXPECT_THROW(match_template(var, flat), PreconditionError);
  EXPECT_EQ(match_template(flat, var), 0.0);
}

// Top-down view with the vehicle at the origin heading +z: row 0 is the far
// front and column 0 the far left, as in the AVM.
GrayImage overhead(const WorldSpec& w) { return render_ground(w, {0, 0}, 3.0, 3.0, 0.005); }

WorldSpec bay_world(bool occupied, bool base) {
  WorldSpec w;
  w.lanes.push_back({{-0.3, -3}, {0.3, 3}});
  w.scale_line = {{10, 10}, {10, 10.3}};
  Bay b;
  b.rect = {{-0.5, 0.0}, kPi, 0.55, 0.32};
  b.occupied = occupied;
  b.has_base_line = base;
  w.bays.push_back(b);
  return w;
}

TEST(DetectSpaceTest, VacantLeftBayFound) {
  const PerceptionParams p;
  const AvmRegions regions;
  const auto hyps = detect_empty_space(overhead(bay_world(false, true)), make_template_bank(),
                                       regions.left_bays, BaySide::Left, p);
  ASSERT_EQ(hyps.size(), 1u);
  EXPECT_EQ(hyps[0].side, BaySide::Left);
  EXPECT_GE(hyps[0].score, p.accept_threshold);
  // Split separation is the bay width: 0.32 m at 5 mm/px.
  EXPECT_NEAR(std::abs(hyps[0].split_b.midpoint().row - hyps[0].split_a.midpoint().row), 64.0, 2.0);
  ASSERT_TRUE(hyps[0].base);
  const double rel = std::abs(std::abs(hyps[0].base->angle() - hyps[0].split_a.angle()) - 0.5 * kPi);
  EXPECT_LT(rad2deg(rel), 5.0);
}

TEST(DetectSpaceTest, TwoLineBayHasNoBase) {
  const PerceptionParams p;
  const AvmRegions regions;
  const auto hyps = detect_empty_space(overhead(bay_world(false, false)), make_template_bank(),
                                       regions.left_bays, BaySide::Left, p);
  ASSERT_EQ(hyps.size(), 1u);
  EXPECT_FALSE(hyps[0].base);
}

TEST(DetectSpaceTest, OccupiedBayRejected) {
  const AvmRegions regions;
  EXPECT_TRUE(detect_empty_space(overhead(bay_world(true, true)), make_template_bank(),
                                 regions.left_bays, BaySide::Left, PerceptionParams{})
                  .empty());
}

TEST(DetectSpaceTest, BlankFloorIsEmpty) {
  const AvmRegions regions;
  const GrayImage blank(600, 600, 80);
  EXPECT_TRUE(
      detect_empty_space(blank, make_template_bank(), regions.left_bays, BaySide::Left, PerceptionParams{})
          .empty());
}

GrayImage front_view(std::optional<ArrowDirection> dir) {
  WorldSpec w;
  w.lanes.push_back({{-0.3, -3}, {0.3, 3}});
  w.scale_line = {{10, 10}, {10, 10.3}};
  if (dir) w.arrows.push_back({{0.0, 0.6}, kPi / 2, *dir});
  const AvmRegions regions;
  return crop(overhead(w), regions.front);
}

TEST(ArrowTest, LeftArrowAtCanonicalPose) {
  const ArrowObservation obs = classify_arrow(front_view(ArrowDirection::Left), PerceptionParams{});
  ASSERT_EQ(obs.direction, ArrowDirection::Left);
  ASSERT_TRUE(obs.positive_edge && obs.negative_edge);
  EXPECT_LT(obs.positive_edge->center.row, obs.negative_edge->center.row);
}

TEST(ArrowTest, MirroredIsRight) {
  const PerceptionParams p;
  EXPECT_EQ(classify_arrow(mirror_horizontal(front_view(ArrowDirection::Left)), p).direction,
            ArrowDirection::Right);
  EXPECT_EQ(classify_arrow(front_view(ArrowDirection::Right), p).direction, ArrowDirection::Right);
}

TEST(ArrowTest, BlankFloorIsNone) {
  EXPECT_FALSE(classify_arrow(front_view(std::nullopt), PerceptionParams{}).direction);
}

ArrowObservation seen(std::optional<ArrowDirection> d) {
  ArrowObservation o;
  o.direction = d;
  return o;
}

TEST(DebounceTest, FiresOnEleventhFrameOnce) {
  DebounceState s;
  int fired = 0;
  for (int i = 1; i <= 30; ++i) {
    auto [next, cmd] = debounce_arrow(s, seen(ArrowDirection::Left));
    s = next;
    if (i <= 10) EXPECT_FALSE(cmd);
    if (cmd) {
      EXPECT_EQ(i, 11);
      EXPECT_EQ(cmd->direction, ArrowDirection::Left);
      ++fired;
    }
  }
  EXPECT_EQ(fired, 1);
}

TEST(DebounceTest, GapResetsRun) {
  DebounceState s;
  std::vector<std::optional<ArrowDirection>> seq(7, ArrowDirection::Left);
  seq.push_back(std::nullopt);
  for (int i = 0; i < 11; ++i) seq.push_back(ArrowDirection::Left);
  int fired_at = -1;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto [next, cmd] = debounce_arrow(s, seen(seq[i]));
    s = next;
    if (cmd) fired_at = static_cast<int>(i);
  }
  EXPECT_EQ(fired_at, static_cast<int>(seq.size()) - 1);
}

TEST(DebounceTest, RotatingSuppresses) {
  DebounceState s;
  s.rotating = true;
  for (int i = 0; i < 20; ++i) {
    auto [next, cmd] = debounce_arrow(s, seen(ArrowDirection::Left));
    s = next;
    EXPECT_FALSE(cmd);
    EXPECT_EQ(s.count, 0);
  }
}

TEST(AlignmentTest, ParallelVehicleHasZeroDeltas) {
  // Side views of split lines running straight along the rows.
  GrayImage left(100, 140, 60), right(100, 140, 60);
  for (int r = 0; r < 140; ++r) {
    for (int c = 80; c < 86; ++c) left.at(c, r) = 200;
    for (int c = 14; c < 20; ++c) right.at(c, r) = 200;
  }
  const GrayImage rear(100, 120, 60);
  const Alignment a = measure_alignment(left, right, rear, {}, PerceptionParams{});
  ASSERT_TRUE(a.left_delta_deg && a.right_delta_deg);
  EXPECT_NEAR(*a.left_delta_deg, 0.0, 0.1);
  EXPECT_NEAR(*a.right_delta_deg, 0.0, 0.1);
  EXPECT_FALSE(a.rear_gap_px);
}

TEST(AlignmentTest, RearGapShrinksWhileReversing) {
  double last = 1e9;
  for (int gap = 90; gap >= 20; gap -= 10) {
    GrayImage rear(100, 120, 60);
    for (int r = gap; r < gap + 6; ++r) {
      for (int c = 0; c < 100; ++c) rear.at(c, r) = 200;
    }
    const Alignment a = measure_alignment(GrayImage(100, 140, 60), GrayImage(100, 140, 60), rear, {},
                                          PerceptionParams{});
    ASSERT_TRUE(a.rear_gap_px) << gap;
    EXPECT_LT(*a.rear_gap_px, last);
    last = *a.rear_gap_px;
  }
}

}  // namespace
}  // namespace valet
