#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valet/avm.hpp"
#include "valet/keyframe_map.hpp"
#include "valet/sim.hpp"
#include "valet/world.hpp"

namespace valet {

enum class ExperimentKind { LoopReturn, ArrowRate, Parking, LutBench };

const char* to_string(ExperimentKind kind);

/// Random glare spots drawn per trial around the experiment's target markings.
struct GlareModel {
  int count = 0;
  double radius_min = 0.03;
  double radius_max = 0.06;
  double intensity_min = 0.4;
  double intensity_max = 0.6;
  double spread = 0.25;  ///< half-size of the square around the target, metres
};

struct Scenario {
  std::string name;
  std::string world_path;  ///< empty when the world was given inline
  WorldSpec world;
  OdometryModel odometry;
  ExperimentKind experiment = ExperimentKind::LoopReturn;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  double rig_height = 0.3;
  double rig_pitch = deg2rad(30.0);
  int image_size = 800;
  AvmSpec avm;
  AvmRegions regions;

  /// Scale-line areas (AVM pixels, rows) for the slam-to-aerial estimate.
  PixelRect scale_area_a{150, 120, 120, 40};
  PixelRect scale_area_b{150, 320, 120, 40};

  GlareModel glare;
  double pixel_noise = 0.0;       ///< std of additive AVM noise, grey levels
  double start_jitter = 0.0;      ///< std of lateral start offset, metres
  double heading_jitter = 0.0;    ///< std of start heading, radians
  int perception_interval = 2;    ///< simulation steps per perception frame
  double dt = 0.02;
  int max_steps = 50000;
  int lut_rigs = 100;             ///< lut-bench: random rigs per trial
};

/// Parses a scenario document. Relative world paths resolve against `base_dir`.
Scenario load_scenario(std::string_view text, const std::string& base_dir = ".");
Scenario load_scenario_file(const std::string& path);

struct TrialRecord {
  std::string scenario;
  ExperimentKind experiment = ExperimentKind::LoopReturn;
  int trial = 0;
  bool success = false;
  std::optional<double> distance_error_m;
  std::optional<double> heading_error_deg;
  std::optional<double> clearance_m;
  int steps = 0;
  std::string phases;  ///< `name@seconds` entries (simulated time) joined by ';'
  std::string note;
  double runtime_ms = 0.0;        ///< wall clock; never written to the data CSV
  std::optional<double> speedup;  ///< lut-bench only; wall-clock derived
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< overrides the scenario seed
  bool dump_frames = false;
  std::optional<std::string> out_dir;
};

/// Runs every trial of the scenario; trial i uses seed + i.
std::vector<TrialRecord> run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Single trials, exposed for tests and the acceptance harness.
TrialRecord run_loop_return_trial(const Scenario& s, int trial, std::uint64_t seed,
                                  const std::string& dump_dir = "");
TrialRecord run_arrow_trial(const Scenario& s, int trial, std::uint64_t seed,
                            const std::string& dump_dir = "");
TrialRecord run_parking_trial(const Scenario& s, int trial, std::uint64_t seed,
                              const std::string& dump_dir = "");
TrialRecord run_lut_trial(const Scenario& s, int trial, std::uint64_t seed);

/// Straight drive past a scale line with crossing times solved exactly, then
/// the full scale chain. Returns the composed estimate.
ScaleEstimate run_scale_recovery(const OdometryModel& odometry, double resolution,
                                 double aerial_separation_px, double line_length_m);

/// Randomly perturbed copy of the default rig (heights, pitches, yaws, mounts).
CameraRig random_rig(const VehicleParams& vehicle, std::uint64_t seed, int image_size = 800);

/// Deterministic data CSV (no wall-clock values).
void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out);
/// Wall-clock side file: trial, runtime_ms, speedup.
void write_runtimes_csv(const std::vector<TrialRecord>& records, std::ostream& out);
std::vector<TrialRecord> read_records_csv(std::istream& in);
void read_runtimes_csv(std::istream& in, std::vector<TrialRecord>& records);

}  // namespace valet
