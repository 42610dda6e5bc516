#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "valet/errors.hpp"
#include "valet/perception.hpp"
#include "valet/planner.hpp"
#include "valet/scenario.hpp"

namespace valet {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

class PhaseLog {
 public:
  void mark(const char* name, double t) {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed << name << '@' << t;
    if (!text_.empty()) text_ += ';';
    text_ += os.str();
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

CameraRig scenario_rig(const Scenario& s, const WorldSpec& world) {
  return default_rig(world.vehicle, s.rig_height, s.rig_pitch, s.image_size);
}

VehicleState jittered_start(const Pose2& pose, const Scenario& s, std::mt19937_64& rng) {
  VehicleState st;
  double lateral = 0.0, dh = 0.0;
  if (s.start_jitter > 0.0) lateral = std::normal_distribution<double>(0.0, s.start_jitter)(rng);
  if (s.heading_jitter > 0.0) dh = std::normal_distribution<double>(0.0, s.heading_jitter)(rng);
  const Vec2 p = pose.position() + lateral * left_dir(pose.heading);
  st.x = p.x;
  st.z = p.z;
  st.heading = normalize_angle(pose.heading + dh);
  return st;
}

void add_glare(WorldSpec& world, const GlareModel& g, Vec2 target, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> off(-g.spread, g.spread);
  std::uniform_real_distribution<double> rad(g.radius_min, g.radius_max);
  std::uniform_real_distribution<double> inten(g.intensity_min, g.intensity_max);
  for (int i = 0; i < g.count; ++i) {
    GlareSpot spot;
    spot.center = {target.x + off(rng), target.z + off(rng)};
    spot.radius = rad(rng);
    spot.intensity = inten(rng);
    world.glare_spots.push_back(spot);
  }
}

/// True when the vehicle centre is more than `margin` outside every lane. A
/// world without lanes has no boundary.
bool off_lanes(const WorldSpec& world, const VehicleState& st, double margin) {
  if (world.lanes.empty()) return false;
  const Vec2 c = vehicle_center(st.pose(), world.vehicle);
  for (const AxisRect& l : world.lanes) {
    const AxisRect grown{l.min - Vec2{margin, margin}, l.max + Vec2{margin, margin}};
    if (grown.contains(c)) return false;
  }
  return true;
}

void apply_controls(VehicleState& st, const Controls& c) {
  st.steer = c.steer;
  st.speed = c.speed;
  st.gear = c.gear;
}

void dump(const std::string& dir, const std::string& name, int index, const GrayImage& img) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ostringstream os;
  os << dir << '/' << name << '_' << index << ".pgm";
  write_pgm(img, os.str());
}

}  // namespace


TrialRecord run_loop_return_trial(const Scenario& s, int trial, std::uint64_t seed,
                                  const std::string& dump_dir) {
  const auto t_start = Clock::now();
  TrialRecord rec;
  rec.scenario = s.name;
  rec.experiment = ExperimentKind::LoopReturn;
  rec.trial = trial;

  std::mt19937_64 rng(seed);
  WorldSpec world = s.world;
  for (const ArrowMarking& a : s.world.arrows) add_glare(world, s.glare, a.position, rng);
  const VehicleParams& vp = world.vehicle;
  const CameraRig rig = scenario_rig(s, world);
  const Lut lut = build_lut(rig, s.avm);
  Sensor sensor(world, rig, lut, s.pixel_noise, seed ^ 0x9e3779b97f4a7c15ULL);
  const PerceptionParams pp;

  VehicleState st = jittered_start(world.start_pose, s, rng);
  OdometryModel om = s.odometry;
  om.seed = seed;
  Odometry odo(om, st.pose());
  const double sigma = om.scale;
  KeyframeMap map(KeyframeParams::for_scale(sigma));
  std::vector<Pose2> kf_true;
  map.maybe_create_keyframe(odo.map_pose());
  kf_true.push_back(st.pose());

  PhaseLog phases;
  phases.mark("lap", 0.0);
  ArrowDriver driver(vp);
  DebounceState deb;
  Pose2 p0_true;
  bool closed = false;
  int step = 0;
  int frame = 0;
  for (; step < s.max_steps; ++step) {
    std::optional<TurnCommand> cmd;
    if (step % s.perception_interval == 0) {
      sensor.set_state(st);
      const GrayImage front = sensor.avm(s.regions.front);
      if (frame % 25 == 0) dump(dump_dir, "front", frame, front);
      ++frame;
      deb.rotating = driver.rotating();
      auto [next, c] = debounce_arrow(deb, classify_arrow(front, pp));
      deb = next;
      cmd = c;
    }
    apply_controls(st, driver.step(cmd, odo.map_pose().heading));
    st = step_vehicle(st, vp, s.dt);
    if (off_lanes(world, st, 0.5)) break;
    const Pose2 mp = odo.observe(st.pose());
    if (map.maybe_create_keyframe(mp)) kf_true.push_back(st.pose());
    if (map.detect_loop_closure(mp)) {
      if (!(map.keyframes().back().pose == mp)) kf_true.push_back(st.pose());
      // Place recognition stand-in: the revisit constraint is the start
      // keyframe composed with the true relative pose, in map units.
      const Pose2& k0 = map.keyframes().front().pose;
      const Vec2 rel = to_local(kf_true.front(), st.pose().position());
      const Vec2 mpos = to_world(k0, sigma * rel);
      const Pose2 matched{mpos.x, mpos.z, normalize_angle(k0.heading + st.heading - kf_true.front().heading)};
      map.close_loop(mp, matched);
      p0_true = st.pose();
      closed = true;
      break;
    }
  }
  if (!closed) {
    rec.steps = step;
    rec.note = step < s.max_steps ? "left the lanes" : "loop not closed";
    rec.phases = phases.str();
    rec.runtime_ms = elapsed_ms(t_start);
    return rec;
  }
  if (kf_true.size() != map.keyframes().size()) throw StateError("keyframe bookkeeping out of sync");
  phases.mark("follow", step * s.dt);

  const auto& kfs = map.keyframes();
  const int last = static_cast<int>(kfs.size()) - 1;
  FollowerState fs = make_follower(map, sigma, vp);
  fs.target = 0;
  Pose2 est = kfs.back().pose;
  std::mt19937_64 follow_rng(seed + 0x5bd1e995ULL);
  auto relocalize = [&](int k) {
    const Vec2 rel = to_local(kf_true[k], st.pose().position());
    const Vec2 p = to_world(kfs[k].pose, sigma * rel);
    est = {p.x, p.z, normalize_angle(kfs[k].pose.heading + st.heading - kf_true[k].heading)};
  };
  auto advance = [&](double dt) {
    const Pose2 prev_true = st.pose();
    st = step_vehicle(st, vp, dt);
    est = observe_pose(om, follow_rng, st.pose(), est, prev_true);
  };

  bool stopped = false;
  for (; step < s.max_steps && !stopped; ++step) {
    if (fs.target < last) {
      const int before = fs.target;
      auto [next, ctl] = follow_step(std::span<const Keyframe>(kfs.data(), last), est, fs, vp);
      if (next.target != before) relocalize(before);
      if (next.mode == FollowMode::Done) {
        next.mode = FollowMode::Follow;
        next.target = last;
      }
      fs = next;
      if (fs.target < last) {
        apply_controls(st, ctl);
        advance(s.dt);
        continue;
      }
    }
    // Final approach: a biarc onto the stop pose once one fits within the
    // steering limit; until then pure pursuit toward a point past the stop
    // pose, stopping on its perpendicular with a partial step.
    const Pose2& goal = kfs[last].pose;
    const double tan_max = std::tan(vp.steer_max);
    const auto arc = plan_biarc(est, goal);
    if (arc && std::abs(arc->k1) * fs.wheelbase_map <= tan_max &&
        std::abs(arc->k2) * fs.wheelbase_map <= tan_max) {
      const double v = vp.cruise_speed;
      auto drive = [&](double k, double len) {
        if (!(len > 0.0)) return;
        apply_controls(st, {std::atan(k * fs.wheelbase_map), v, Gear::Forward});
        advance(len / (sigma * v));
      };
      const double ds = sigma * v * s.dt;
      if (arc->length() <= ds) {
        drive(arc->k1, arc->s1);
        drive(arc->k2, arc->s2);
        stopped = true;
      } else if (arc->s1 >= ds) {
        drive(arc->k1, ds);
      } else {
        drive(arc->k1, arc->s1);
        drive(arc->k2, ds - arc->s1);
      }
      continue;
    }
    const Vec2 aim = goal.position() + 0.25 * sigma * heading_dir(goal.heading);
    Controls ctl = follow_controls(fs, to_local(est, aim), vp);
    const double ahead = to_local(est, goal.position()).x;
    const double ds = sigma * ctl.speed * s.dt;
    apply_controls(st, ctl);
    if (ctl.gear == Gear::Forward && ahead <= ds) {
      if (ahead > 0.0) advance(ahead / (sigma * ctl.speed));
      stopped = true;
    } else {
      advance(s.dt);
    }
  }
  phases.mark("stop", step * s.dt);

  rec.steps = step;
  rec.phases = phases.str();
  rec.success = stopped;
  if (stopped) {
    rec.distance_error_m = distance(st.pose().position(), p0_true.position());
    rec.heading_error_deg = std::abs(rad2deg(normalize_angle(st.heading - p0_true.heading)));
  } else {
    rec.note = "step cap reached";
  }
  rec.runtime_ms = elapsed_ms(t_start);
  return rec;
}

TrialRecord run_arrow_trial(const Scenario& s, int trial, std::uint64_t seed,
                            const std::string& dump_dir) {
  const auto t_start = Clock::now();
  TrialRecord rec;
  rec.scenario = s.name;
  rec.experiment = ExperimentKind::ArrowRate;
  rec.trial = trial;
  if (s.world.arrows.empty()) throw ConfigError("arrow-rate scenario needs at least one arrow");

  std::mt19937_64 rng(seed);
  WorldSpec world = s.world;
  const ArrowMarking arrow = world.arrows[static_cast<std::size_t>(trial) % world.arrows.size()];
  add_glare(world, s.glare, arrow.position, rng);
  const VehicleParams& vp = world.vehicle;
  const CameraRig rig = scenario_rig(s, world);
  const Lut lut = build_lut(rig, s.avm);
  Sensor sensor(world, rig, lut, s.pixel_noise, seed ^ 0x9e3779b97f4a7c15ULL);
  const PerceptionParams pp;

  // Approach along the arrow's lane, starting well before it.
  constexpr double kApproach = 1.4;
  const Vec2 start = arrow.position - kApproach * heading_dir(arrow.heading);
  VehicleState st = jittered_start({start.x, start.z, arrow.heading}, s, rng);
  st.speed = vp.cruise_speed;

  PhaseLog phases;
  phases.mark("approach", 0.0);
  DebounceState deb;
  int step = 0;
  int frame = 0;
  std::optional<TurnCommand> fired;
  for (; step < s.max_steps; ++step) {
    const Vec2 center = vehicle_center(st.pose(), vp);
    if (to_local({center.x, center.z, st.heading}, arrow.position).x < 0.0) break;
    if (step % s.perception_interval == 0) {
      sensor.set_state(st);
      const GrayImage front = sensor.avm(s.regions.front);
      if (frame % 10 == 0) dump(dump_dir, "front", frame, front);
      ++frame;
      auto [next, c] = debounce_arrow(deb, classify_arrow(front, pp));
      deb = next;
      if (c) {
        fired = c;
        break;
      }
    }
    st = step_vehicle(st, vp, s.dt);
  }
  rec.steps = step;
  if (fired) {
    phases.mark("command", step * s.dt);
    rec.success = fired->direction == arrow.direction;
    if (!rec.success) rec.note = "wrong direction";
  } else {
    rec.note = "no command";
  }
  rec.phases = phases.str();
  rec.runtime_ms = elapsed_ms(t_start);
  return rec;
}

namespace {

ReferenceSlopes calibrate_reference(const WorldSpec& world, const CameraRig& rig, const Lut& lut,
                                    const AvmRegions& regions, const PerceptionParams& pp) {
  if (world.bays.empty()) throw ConfigError("parking scenario needs at least one bay");
  WorldSpec cal;
  cal.vehicle = world.vehicle;
  cal.floor_albedo = world.floor_albedo;
  cal.marking_albedo = world.marking_albedo;
  cal.line_width = world.line_width;
  Bay bay = world.bays.front();
  bay.occupied = false;
  bay.rect.center = {0.0, 0.0};
  bay.rect.heading = 0.5 * kPi;
  cal.bays = {bay};
  // Parked nose-out: heading points from the far end toward the opening.
  VehicleState st;
  st.heading = -0.5 * kPi;
  const Vec2 rear = Vec2{0.0, 0.0} - 0.5 * world.vehicle.wheelbase * heading_dir(st.heading);
  st.x = rear.x;
  st.z = rear.z;
  Sensor sensor(cal, rig, lut, 0.0, 0);
  sensor.set_state(st);
  const auto [l, r] = measure_side_slopes(sensor.avm(regions.left_side), sensor.avm(regions.right_side), pp);
  if (!l || !r) throw EstimationError("slope calibration: split lines not visible");
  return {*l, *r};
}

std::optional<double> scale_line_row(const GrayImage& band, const PixelRect& roi,
                                     const PerceptionParams& pp) {
  auto centers = line_centers(band, FilterOrientation::Vertical, pp);
  for (CenterPoint& c : centers) {
    c.col += roi.col0;
    c.row += roi.row0;
  }
  std::optional<double> best;
  for (const LineSegment2D& seg : fit_parking_lines(centers, roi, LineAxis::AlongCols, pp)) {
    if (std::abs(seg.angle()) > deg2rad(pp.parallel_tol_deg) || seg.length() < pp.min_split_length) continue;
    const double row = seg.midpoint().row;
    if (!best || row > *best) best = row;
  }
  return best;
}

bool in_rows(double row, const PixelRect& r) { return row >= r.row0 && row < r.row1(); }

}  // namespace

TrialRecord run_parking_trial(const Scenario& s, int trial, std::uint64_t seed,
                              const std::string& dump_dir) {
  const auto t_start = Clock::now();
  TrialRecord rec;
  rec.scenario = s.name;
  rec.experiment = ExperimentKind::Parking;
  rec.trial = trial;

  std::mt19937_64 rng(seed);
  WorldSpec world = s.world;
  for (const Bay& b : s.world.bays) add_glare(world, s.glare, b.rect.center, rng);
  const VehicleParams& vp = world.vehicle;
  const CameraRig rig = scenario_rig(s, world);
  const Lut lut = build_lut(rig, s.avm);
  const PerceptionParams pp;
  const ReferenceSlopes reference = calibrate_reference(world, rig, lut, s.regions, pp);
  const TemplateBank bank = make_template_bank();
  Sensor sensor(world, rig, lut, s.pixel_noise, seed ^ 0x9e3779b97f4a7c15ULL);

  VehicleState st = jittered_start(world.start_pose, s, rng);
  OdometryModel om = s.odometry;
  om.seed = seed;
  Odometry odo(om, st.pose());

  ParkingParams pk;
  pk.forward_offset_m = 1.8 * world.model_scale;
  pk.avm = s.avm;
  pk.max_depth_travel_m = 2.0 * world.bays.front().rect.length;
  pk.trigger_row = parking_trigger_row(vp, s.avm, pk.forward_offset_m);
  const Bay& ref_bay = world.bays.front();
  // Splits are painted depth + line_width long; the filter loses half a line
  // width at each end, so the detectable span is the bay depth.
  const double visible_split_m = ref_bay.rect.length;

  ScaleEstimate scale;
  std::vector<CrossingEvent> events;
  std::vector<double> split_px;
  ParkingFsm fsm;
  ParkingPhase aborted_from = fsm.phase;
  Alignment alignment;
  std::optional<ParkingSpaceHypothesis> hyp;
  GrayImage canvas(s.avm.width(), s.avm.height());
  PhaseLog phases;
  phases.mark(to_string(fsm.phase), 0.0);

  int step = 0;
  int frame = 0;
  for (; step < s.max_steps; ++step) {
    const bool locating = fsm.phase == ParkingPhase::Locate;
    const bool frame_due = !locating || step % s.perception_interval == 0;
    std::optional<ParkingSpaceHypothesis> fsm_hyp;
    if (frame_due) {
      sensor.set_state(st);
      const Pose2 mp = odo.map_pose();
      if (events.size() < 2) {
        if (auto row = scale_line_row(sensor.avm(s.regions.scale_band), s.regions.scale_band, pp)) {
          if (events.empty() && in_rows(*row, s.scale_area_a)) {
            events.push_back({mp, *row});
          } else if (events.size() == 1 && in_rows(*row, s.scale_area_b)) {
            events.push_back({mp, *row});
            scale.slam_to_aerial = estimate_slam_aerial_scale(events, events[1].avm_row - events[0].avm_row);
            if (scale.aerial_to_topo) scale.compose();
            phases.mark("scale_line", step * s.dt);
          }
        }
      }
      if (fsm.phase == ParkingPhase::Locate || fsm.phase == ParkingPhase::ForwardOffset) {
        const PixelRect& roi = s.regions.left_bays;
        const GrayImage crop_img = sensor.avm(roi);
        for (int r = 0; r < roi.height; ++r) {
          std::copy(crop_img.row(r).begin(), crop_img.row(r).end(), canvas.row(roi.row0 + r).begin() + roi.col0);
        }
        if (frame % 10 == 0) dump(dump_dir, "bays", frame, crop_img);
        hyp.reset();
        for (const ParkingSpaceHypothesis& h : detect_empty_space(canvas, bank, roi, BaySide::Left, pp)) {
          if (locating && center_row(h) > pk.trigger_row + pk.trigger_window) continue;
          if (!hyp || center_row(h) > center_row(*hyp)) hyp = h;
        }
        // Glare mostly shortens a detected split, so take the longer one per
        // frame and a high percentile over the frames seen so far.
        if (hyp && locating) {
          split_px.push_back(std::max(hyp->split_a.length(), hyp->split_b.length()));
          std::vector<double> sorted = split_px;
          const auto k = static_cast<std::ptrdiff_t>(0.8 * static_cast<double>(sorted.size() - 1));
          std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
          scale.aerial_to_topo = estimate_aerial_topo_scale(sorted[static_cast<std::size_t>(k)], visible_split_m);
          if (scale.slam_to_aerial) scale.compose();
        }
        if (scale.slam_to_topo) fsm_hyp = hyp;
      } else {
        alignment = measure_alignment(sensor.avm(s.regions.left_side), sensor.avm(s.regions.right_side),
                                      sensor.avm(s.regions.rear), reference, pp);
        if (frame % 10 == 0) dump(dump_dir, "rear", frame, sensor.avm(s.regions.rear));
      }
      ++frame;
    }

    const ParkingPhase before = fsm.phase;
    auto [next, ctl] = parking_fsm_step(fsm, fsm_hyp, alignment, scale, odo.map_pose(), vp, pk);
    fsm = next;
    if (fsm.phase == ParkingPhase::Aborted) aborted_from = before;
    if (fsm.phase != before) phases.mark(to_string(fsm.phase), step * s.dt);
    if (fsm.phase == ParkingPhase::Done || fsm.phase == ParkingPhase::Aborted) break;
    apply_controls(st, ctl);
    st = step_vehicle(st, vp, s.dt);
    odo.observe(st.pose());
    if (fsm.phase == ParkingPhase::Locate && off_lanes(world, st, 0.5)) break;
  }

  rec.steps = step;
  rec.phases = phases.str();
  double clearance = -1e9;
  for (const Bay& b : world.bays) clearance = std::max(clearance, bay_clearance(st, vp, b.rect));
  rec.clearance_m = clearance;
  if (fsm.phase == ParkingPhase::Done) {
    rec.success = clearance > 0.18 * world.model_scale;
    if (!rec.success) rec.note = "insufficient clearance";
  } else {
    if (fsm.phase == ParkingPhase::Aborted) {
      rec.note = std::string("aborted in ") + to_string(aborted_from);
    } else {
      rec.note = step < s.max_steps ? "no space found" : "step cap reached";
    }
  }
  rec.runtime_ms = elapsed_ms(t_start);
  return rec;
}

CameraRig random_rig(const VehicleParams& vehicle, std::uint64_t seed, int image_size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> height(0.2, 0.4);
  std::uniform_real_distribution<double> pitch(deg2rad(15.0), deg2rad(50.0));
  std::uniform_real_distribution<double> yaw(deg2rad(-8.0), deg2rad(8.0));
  std::uniform_real_distribution<double> mount(-0.02, 0.02);
  CameraRig rig = default_rig(vehicle, 0.3, deg2rad(30.0), image_size);
  for (FisheyeCamera& cam : rig.cameras) {
    cam.extrinsic.height = height(rng);
    cam.extrinsic.pitch = pitch(rng);
    cam.extrinsic.yaw += yaw(rng);
    cam.extrinsic.forward += mount(rng);
    cam.extrinsic.left += mount(rng);
  }
  return rig;
}

TrialRecord run_lut_trial(const Scenario& s, int trial, std::uint64_t seed) {
  const auto t_start = Clock::now();
  TrialRecord rec;
  rec.scenario = s.name;
  rec.experiment = ExperimentKind::LutBench;
  rec.trial = trial;

  std::mt19937_64 rng(seed);
  std::vector<GrayImage> images;
  for (int i = 0; i < kCameraCount; ++i) {
    GrayImage img(s.image_size, s.image_size);
    for (std::uint8_t& p : img.pixels()) p = static_cast<std::uint8_t>(rng() >> 56);
    images.push_back(std::move(img));
  }
  int mismatches = 0;
  double apply_ms = 0.0, direct_ms = 0.0;
  for (int r = 0; r < s.lut_rigs; ++r) {
    const CameraRig rig = random_rig(s.world.vehicle, rng(), s.image_size);
    const Lut lut = build_lut(rig, s.avm);
    const auto t0 = Clock::now();
    const GrayImage a = apply_lut(lut, images);
    apply_ms += elapsed_ms(t0);
    const auto t1 = Clock::now();
    const GrayImage d = remap_direct(rig, s.avm, images);
    direct_ms += elapsed_ms(t1);
    if (!(a == d)) ++mismatches;
  }
  rec.steps = s.lut_rigs;
  rec.success = mismatches == 0;
  if (!rec.success) rec.note = std::to_string(mismatches) + " rigs differ";
  rec.speedup = apply_ms > 0.0 ? direct_ms / apply_ms : 0.0;
  rec.runtime_ms = elapsed_ms(t_start);
  return rec;
}

ScaleEstimate run_scale_recovery(const OdometryModel& odometry, double resolution,
                                 double aerial_separation_px, double line_length_m) {
  VehicleParams vp;
  VehicleState st;
  st.speed = vp.cruise_speed;
  Odometry odo(odometry, st.pose());
  constexpr double kDt = 0.02;
  // The scale line reaches the two areas when the vehicle has covered these distances.
  const double targets[2] = {0.5, 0.5 + aerial_separation_px * resolution};
  std::vector<CrossingEvent> events;
  for (int i = 0; i < 100000 && events.size() < 2; ++i) {
    const double remaining = targets[events.size()] - st.x;
    const bool hit = remaining <= st.speed * kDt;
    st = step_vehicle(st, vp, hit ? remaining / st.speed : kDt);
    const Pose2 mp = odo.observe(st.pose());
    if (hit) events.push_back({mp, 0.0});
  }
  ScaleEstimate est;
  est.slam_to_aerial = estimate_slam_aerial_scale(events, aerial_separation_px);
  est.aerial_to_topo = estimate_aerial_topo_scale(line_length_m / resolution, line_length_m);
  est.compose();
  return est;
}

}  // namespace valet
