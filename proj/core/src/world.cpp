#include "valet/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace valet {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing required field '" + where + key + "'");
  }
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ConfigError("field '" + where + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj, key, where);
}

Vec2 point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError("field '" + field + "' must be a [x, z] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

const json& array_field(const json& doc, const char* key) {
  const json& v = require(doc, key, "");
  if (!v.is_array()) throw ConfigError(std::string("field '") + key + "' must be an array");
  return v;
}

void check_unit(double v, const std::string& field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError("field '" + field + "' out of range [0,1]: " + std::to_string(v));
  }
}

void check_positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ConfigError("field '" + field + "' must be positive");
}

}  // namespace

WorldSpec load_world(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("world parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("world document must be a JSON object");

  WorldSpec w;
  const json& lanes = array_field(doc, "lanes");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string f = "lanes[" + std::to_string(i) + "].";
    w.lanes.push_back({point(require(lanes[i], "min", f), f + "min"),
                       point(require(lanes[i], "max", f), f + "max")});
  }

  const json& bays = array_field(doc, "bays");
  for (std::size_t i = 0; i < bays.size(); ++i) {
    const std::string f = "bays[" + std::to_string(i) + "].";
    const json& b = bays[i];
    Bay bay;
    bay.rect.center = point(require(b, "center", f), f + "center");
    bay.rect.heading = deg2rad(number(b, "heading_deg", f));
    bay.rect.length = number(b, "depth", f);
    bay.rect.width = number(b, "width", f);
    bay.occupied = b.value("occupied", false);
    bay.has_base_line = b.value("base_line", true);
    w.bays.push_back(bay);
  }

  const json& arrows = array_field(doc, "arrows");
  for (std::size_t i = 0; i < arrows.size(); ++i) {
    const std::string f = "arrows[" + std::to_string(i) + "].";
    const json& a = arrows[i];
    ArrowMarking arrow;
    arrow.position = point(require(a, "position", f), f + "position");
    arrow.heading = deg2rad(number(a, "heading_deg", f));
    const json& dir = require(a, "direction", f);
    const std::string d = dir.is_string() ? dir.get<std::string>() : "";
    if (d == "left") {
      arrow.direction = ArrowDirection::Left;
    } else if (d == "right") {
      arrow.direction = ArrowDirection::Right;
    } else {
      throw ConfigError("field '" + f + "direction' must be \"left\" or \"right\"");
    }
    w.arrows.push_back(arrow);
  }

  const json& sl = require(doc, "scale_line", "");
  w.scale_line = {point(require(sl, "a", "scale_line."), "scale_line.a"),
                  point(require(sl, "b", "scale_line."), "scale_line.b")};

  const json& glare = array_field(doc, "glare_spots");
  for (std::size_t i = 0; i < glare.size(); ++i) {
    const std::string f = "glare_spots[" + std::to_string(i) + "].";
    w.glare_spots.push_back({point(require(glare[i], "center", f), f + "center"),
                             number(glare[i], "radius", f), number(glare[i], "intensity", f)});
  }

  w.floor_albedo = number(doc, "floor_albedo", "");
  w.marking_albedo = number(doc, "marking_albedo", "");
  w.obstacle_albedo = number_or(doc, "obstacle_albedo", w.obstacle_albedo, "");
  w.line_width = number_or(doc, "line_width", w.line_width, "");

  const json& sp = require(doc, "start_pose", "");
  w.start_pose = {number(sp, "x", "start_pose."), number(sp, "z", "start_pose."),
                  normalize_angle(deg2rad(number(sp, "heading_deg", "start_pose.")))};

  const json& v = require(doc, "vehicle", "");
  w.vehicle.wheelbase = number(v, "wheelbase", "vehicle.");
  w.vehicle.width = number(v, "width", "vehicle.");
  w.vehicle.length = number(v, "length", "vehicle.");
  w.vehicle.steer_max = deg2rad(number(v, "steer_max_deg", "vehicle."));
  w.vehicle.cruise_speed = number(v, "cruise_speed", "vehicle.");

  w.model_scale = number(doc, "model_scale", "");

  validate_world(w);
  return w;
}

WorldSpec load_world_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open world file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return load_world(ss.str());
}

void validate_world(const WorldSpec& w) {
  check_unit(w.floor_albedo, "floor_albedo");
  check_unit(w.marking_albedo, "marking_albedo");
  check_unit(w.obstacle_albedo, "obstacle_albedo");
  if (!(w.marking_albedo > w.floor_albedo)) {
    throw ConfigError("field 'marking_albedo' must exceed 'floor_albedo'");
  }
  for (std::size_t i = 0; i < w.bays.size(); ++i) {
    const std::string f = "bays[" + std::to_string(i) + "].";
    check_positive(w.bays[i].rect.length, f + "depth");
    check_positive(w.bays[i].rect.width, f + "width");
  }
  for (std::size_t i = 0; i < w.lanes.size(); ++i) {
    const AxisRect& l = w.lanes[i];
    if (!(l.max.x > l.min.x && l.max.z > l.min.z)) {
      throw ConfigError("field 'lanes[" + std::to_string(i) + "]' must have positive area");
    }
  }
  for (std::size_t i = 0; i < w.glare_spots.size(); ++i) {
    const std::string f = "glare_spots[" + std::to_string(i) + "].";
    check_unit(w.glare_spots[i].intensity, f + "intensity");
    check_positive(w.glare_spots[i].radius, f + "radius");
  }
  check_positive(w.scale_line.length(), "scale_line");
  check_positive(w.line_width, "line_width");
  check_positive(w.model_scale, "model_scale");
  const VehicleParams& v = w.vehicle;
  check_positive(v.wheelbase, "vehicle.wheelbase");
  check_positive(v.width, "vehicle.width");
  check_positive(v.length, "vehicle.length");
  check_positive(v.cruise_speed, "vehicle.cruise_speed");
  check_positive(v.steer_max, "vehicle.steer_max_deg");
  if (!(v.steer_max < 0.5 * kPi)) throw ConfigError("field 'vehicle.steer_max_deg' must be < 90");
}

VehicleState step_vehicle(const VehicleState& s, const VehicleParams& p, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("step_vehicle: dt must be positive");
  VehicleState out = s;
  out.steer = std::clamp(s.steer, -p.steer_max, p.steer_max);
  const double ds = signed_speed(s) * dt;
  const double curvature = std::tan(out.steer) / p.wheelbase;
  const double dh = ds * curvature;
  if (std::abs(dh) < 1e-12) {
    out.x += ds * std::cos(s.heading);
    out.z += ds * std::sin(s.heading);
  } else {
    const double r = 1.0 / curvature;
    out.x += r * (std::sin(s.heading + dh) - std::sin(s.heading));
    out.z += r * (std::cos(s.heading) - std::cos(s.heading + dh));
  }
  out.heading = normalize_angle(s.heading + dh);
  return out;
}

Vec2 vehicle_center(const Pose2& rear_axle_pose, const VehicleParams& params) {
  return rear_axle_pose.position() + 0.5 * params.wheelbase * heading_dir(rear_axle_pose.heading);
}

OrientedRect vehicle_footprint(const VehicleState& state, const VehicleParams& params) {
  return {vehicle_center(state.pose(), params), state.heading, params.length, params.width};
}

namespace {

// Positive inside the rectangle (distance to the nearest edge), negative outside.
double signed_inside_distance(const OrientedRect& r, Vec2 p) {
  const Vec2 l = to_local(r.frame(), p);
  const double dx = std::abs(l.x) - 0.5 * r.length;
  const double dz = std::abs(l.z) - 0.5 * r.width;
  if (dx <= 0.0 && dz <= 0.0) return -std::max(dx, dz);
  return -std::hypot(std::max(dx, 0.0), std::max(dz, 0.0));
}

}  // namespace

double bay_clearance(const VehicleState& state, const VehicleParams& params,
                     const OrientedRect& bay) {
  double best = std::numeric_limits<double>::infinity();
  for (Vec2 c : vehicle_footprint(state, params).corners()) {
    best = std::min(best, signed_inside_distance(bay, c));
  }
  return best;
}

ArrowShape arrow_shape(const ArrowMarking& a) {
  constexpr double kLength = 0.30;
  constexpr double kShaftWidth = 0.04;
  constexpr double kHeadWidth = 0.16;
  constexpr double kHeadDepth = 0.08;
  const double point_heading =
      a.heading + (a.direction == ArrowDirection::Left ? 0.5 * kPi : -0.5 * kPi);
  const Vec2 dir = heading_dir(point_heading);
  const Vec2 side = left_dir(point_heading);
  const Vec2 tip = a.position + 0.5 * kLength * dir;
  const Vec2 base = tip - kHeadDepth * dir;
  const Vec2 tail = a.position - 0.5 * kLength * dir;
  ArrowShape s;
  s.shaft = {0.5 * (tail + base), point_heading, distance(tail, base) + 1e-3, kShaftWidth};
  s.head.v = {tip, base + 0.5 * kHeadWidth * side, base - 0.5 * kHeadWidth * side};
  return s;
}

GroundModel::GroundModel(const WorldSpec& world) : floor_(world.floor_albedo) {
  const double lw = world.line_width;
  auto add_rect = [&](const OrientedRect& r, double albedo) {
    prims_.push_back({Primitive::Kind::Rect, r, {}, albedo});
  };
  for (const Bay& bay : world.bays) {
    const Pose2 f = bay.rect.frame();
    const double hw = 0.5 * bay.rect.width;
    const double hl = 0.5 * bay.rect.length;
    for (double side : {-1.0, 1.0}) {
      add_rect({to_world(f, {0.0, side * hw}), bay.rect.heading, bay.rect.length + lw, lw},
               world.marking_albedo);
    }
    if (bay.has_base_line) {
      add_rect({to_world(f, {hl, 0.0}), bay.rect.heading + 0.5 * kPi, bay.rect.width + lw, lw},
               world.marking_albedo);
    }
  }
  for (const ArrowMarking& a : world.arrows) {
    const ArrowShape s = arrow_shape(a);
    add_rect(s.shaft, world.marking_albedo);
    prims_.push_back({Primitive::Kind::Tri, {}, s.head, world.marking_albedo});
  }
  {
    const Segment2& sl = world.scale_line;
    const Vec2 d = sl.b - sl.a;
    add_rect({0.5 * (sl.a + sl.b), std::atan2(d.z, d.x), sl.length(), lw}, world.marking_albedo);
  }
  // Obstacles are painted last so they cover the markings underneath.
  for (const Bay& bay : world.bays) {
    if (bay.occupied) {
      add_rect({bay.rect.center, bay.rect.heading, 0.7 * bay.rect.length, 0.7 * bay.rect.width},
               world.obstacle_albedo);
    }
  }
  glare_ = world.glare_spots;

  // Bounding boxes for the spatial hash.
  std::vector<std::pair<Vec2, Vec2>> boxes;
  auto bbox_of = [](std::span<const Vec2> pts) {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -1.0 * lo;
    for (Vec2 p : pts) {
      lo = {std::min(lo.x, p.x), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.z, p.z)};
    }
    return std::pair{lo, hi};
  };
  for (const Primitive& p : prims_) {
    if (p.kind == Primitive::Kind::Rect) {
      const auto c = p.rect.corners();
      boxes.push_back(bbox_of(c));
    } else {
      boxes.push_back(bbox_of(p.tri.v));
    }
  }
  std::vector<std::pair<Vec2, Vec2>> glare_boxes;
  for (const GlareSpot& g : glare_) {
    glare_boxes.push_back({g.center - Vec2{g.radius, g.radius}, g.center + Vec2{g.radius, g.radius}});
  }
  Vec2 lo{0.0, 0.0}, hi{0.0, 0.0};
  bool first = true;
  for (const auto& b : boxes) {
    lo = first ? b.first : Vec2{std::min(lo.x, b.first.x), std::min(lo.z, b.first.z)};
    hi = first ? b.second : Vec2{std::max(hi.x, b.second.x), std::max(hi.z, b.second.z)};
    first = false;
  }
  for (const auto& b : glare_boxes) {
    lo = first ? b.first : Vec2{std::min(lo.x, b.first.x), std::min(lo.z, b.first.z)};
    hi = first ? b.second : Vec2{std::max(hi.x, b.second.x), std::max(hi.z, b.second.z)};
    first = false;
  }
  origin_ = lo - Vec2{cell_size_, cell_size_};
  cols_ = static_cast<int>(std::ceil((hi.x - origin_.x) / cell_size_)) + 2;
  rows_ = static_cast<int>(std::ceil((hi.z - origin_.z) / cell_size_)) + 2;
  cells_.assign(static_cast<std::size_t>(cols_) * rows_, Cell{});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    index_box(boxes[i].first, boxes[i].second, static_cast<int>(i), false);
  }
  for (std::size_t i = 0; i < glare_boxes.size(); ++i) {
    index_box(glare_boxes[i].first, glare_boxes[i].second, static_cast<int>(i), true);
  }
}

void GroundModel::index_box(Vec2 lo, Vec2 hi, int id, bool glare) {
  const int c0 = std::max(0, static_cast<int>(std::floor((lo.x - origin_.x) / cell_size_)));
  const int c1 = std::min(cols_ - 1, static_cast<int>(std::floor((hi.x - origin_.x) / cell_size_)));
  const int r0 = std::max(0, static_cast<int>(std::floor((lo.z - origin_.z) / cell_size_)));
  const int r1 = std::min(rows_ - 1, static_cast<int>(std::floor((hi.z - origin_.z) / cell_size_)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      Cell& cell = cells_[static_cast<std::size_t>(r) * cols_ + c];
      (glare ? cell.glare : cell.primitives).push_back(id);
    }
  }
}

const GroundModel::Cell* GroundModel::cell_at(Vec2 p) const {
  const double fc = std::floor((p.x - origin_.x) / cell_size_);
  const double fr = std::floor((p.z - origin_.z) / cell_size_);
  if (fc < 0 || fr < 0 || fc >= cols_ || fr >= rows_) return nullptr;
  return &cells_[static_cast<std::size_t>(fr) * cols_ + static_cast<std::size_t>(fc)];
}

double GroundModel::intensity(Vec2 p) const {
  double value = floor_;
  const Cell* cell = cell_at(p);
  if (cell == nullptr) return value;
  // Later primitives paint over earlier ones; the id lists are ascending.
  for (auto it = cell->primitives.rbegin(); it != cell->primitives.rend(); ++it) {
    const Primitive& prim = prims_[static_cast<std::size_t>(*it)];
    const bool hit = prim.kind == Primitive::Kind::Rect ? prim.rect.contains(p) : prim.tri.contains(p);
    if (hit) {
      value = prim.albedo;
      break;
    }
  }
  for (int id : cell->glare) {
    const GlareSpot& g = glare_[static_cast<std::size_t>(id)];
    if (distance(p, g.center) <= g.radius) value += g.intensity;
  }
  return std::clamp(value, 0.0, 1.0);
}

GrayImage render_ground(const GroundModel& ground, Vec2 center, double extent_x, double extent_z,
                        double resolution) {
  if (!(resolution > 0.0) || !(extent_x > 0.0) || !(extent_z > 0.0)) {
    throw PreconditionError("render_ground: resolution and extent must be positive");
  }
  const int w = static_cast<int>(std::lround(extent_x / resolution));
  const int h = static_cast<int>(std::lround(extent_z / resolution));
  GrayImage img(w, h);
  const double x0 = center.x - 0.5 * w * resolution;
  const double z0 = center.z + 0.5 * h * resolution;
  for (int r = 0; r < h; ++r) {
    const double z = z0 - (r + 0.5) * resolution;
    for (int c = 0; c < w; ++c) {
      img.at(c, r) = to_level(ground.intensity({x0 + (c + 0.5) * resolution, z}));
    }
  }
  return img;
}

GrayImage render_ground(const WorldSpec& world, Vec2 center, double extent_x, double extent_z,
                        double resolution) {
  return render_ground(GroundModel(world), center, extent_x, extent_z, resolution);
}

}  // namespace valet
