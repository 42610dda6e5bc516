#include "valet/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "valet/errors.hpp"

namespace valet {
namespace {

using nlohmann::json;

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

std::pair<double, double> range(const json& obj, const char* key, std::pair<double, double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string("field '") + key + "' must be a [min, max] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

PixelRect rect(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 4) {
    throw ConfigError("field '" + field + "' must be [col0, row0, width, height]");
  }
  for (const json& e : v) {
    if (!e.is_number_integer()) throw ConfigError("field '" + field + "' must hold integers");
  }
  return {v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown field '" + where + key + "'");
  }
}

ExperimentKind parse_kind(const json& v) {
  const std::string k = v.is_string() ? v.get<std::string>() : "";
  if (k == "loop-return") return ExperimentKind::LoopReturn;
  if (k == "arrow-rate") return ExperimentKind::ArrowRate;
  if (k == "parking") return ExperimentKind::Parking;
  if (k == "lut-bench") return ExperimentKind::LutBench;
  throw ConfigError("field 'experiment' must be one of loop-return, arrow-rate, parking, lut-bench");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::LoopReturn: return "loop-return";
    case ExperimentKind::ArrowRate: return "arrow-rate";
    case ExperimentKind::Parking: return "parking";
    case ExperimentKind::LutBench: return "lut-bench";
  }
  return "unknown";
}

Scenario load_scenario(std::string_view text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
  check_keys(doc,
             {"name", "world", "experiment", "trials", "seed", "out", "odometry", "rig", "avm",
              "scale_areas", "glare", "pixel_noise", "start_jitter", "heading_jitter_deg",
              "perception_interval", "dt", "max_steps", "lut_rigs"},
             "");

  Scenario s;
  if (!doc.contains("experiment")) throw ConfigError("missing required field 'experiment'");
  s.experiment = parse_kind(doc.at("experiment"));
  s.name = doc.value("name", std::string(to_string(s.experiment)));
  s.trials = integer(doc, "trials", 1);
  if (s.trials < 1) throw ConfigError("field 'trials' must be >= 1");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("field 'seed' must be a non-negative integer");
    s.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("out")) s.out_dir = doc.at("out").get<std::string>();

  if (!doc.contains("world")) throw ConfigError("missing required field 'world'");
  const json& w = doc.at("world");
  if (w.is_string()) {
    std::filesystem::path p(w.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    s.world_path = p.string();
    if (!std::filesystem::exists(p)) throw ConfigError("world file '" + s.world_path + "' does not exist");
    s.world = load_world_file(s.world_path);
  } else if (w.is_object()) {
    s.world = load_world(w.dump());
  } else {
    throw ConfigError("field 'world' must be a path or an object");
  }

  if (doc.contains("odometry")) {
    const json& o = doc.at("odometry");
    check_keys(o, {"scale", "translation_noise", "heading_noise"}, "odometry.");
    s.odometry.scale = number(o, "scale", 1.0);
    s.odometry.translation_noise = number(o, "translation_noise", 0.0);
    s.odometry.heading_noise = number(o, "heading_noise", 0.0);
  }
  s.odometry.validate();

  if (doc.contains("rig")) {
    const json& r = doc.at("rig");
    check_keys(r, {"height", "pitch_deg", "image_size"}, "rig.");
    s.rig_height = number(r, "height", s.rig_height);
    s.rig_pitch = deg2rad(number(r, "pitch_deg", rad2deg(s.rig_pitch)));
    s.image_size = integer(r, "image_size", s.image_size);
  }
  if (doc.contains("avm")) {
    const json& a = doc.at("avm");
    check_keys(a, {"extent_forward", "extent_lateral", "resolution"}, "avm.");
    s.avm.extent_forward = number(a, "extent_forward", s.avm.extent_forward);
    s.avm.extent_lateral = number(a, "extent_lateral", s.avm.extent_lateral);
    s.avm.resolution = number(a, "resolution", s.avm.resolution);
  }
  try {
    s.avm.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("scale_areas")) {
    const json& a = doc.at("scale_areas");
    check_keys(a, {"a", "b"}, "scale_areas.");
    if (a.contains("a")) s.scale_area_a = rect(a.at("a"), "scale_areas.a");
    if (a.contains("b")) s.scale_area_b = rect(a.at("b"), "scale_areas.b");
  }
  if (doc.contains("glare")) {
    const json& g = doc.at("glare");
    check_keys(g, {"count", "radius", "intensity", "spread"}, "glare.");
    s.glare.count = integer(g, "count", 0);
    std::tie(s.glare.radius_min, s.glare.radius_max) = range(g, "radius", {s.glare.radius_min, s.glare.radius_max});
    std::tie(s.glare.intensity_min, s.glare.intensity_max) =
        range(g, "intensity", {s.glare.intensity_min, s.glare.intensity_max});
    s.glare.spread = number(g, "spread", s.glare.spread);
    if (s.glare.count < 0 || s.glare.radius_min <= 0.0 || s.glare.radius_max < s.glare.radius_min ||
        s.glare.intensity_max < s.glare.intensity_min || s.glare.spread < 0.0) {
      throw ConfigError("field 'glare' has out-of-range values");
    }
  }
  s.pixel_noise = number(doc, "pixel_noise", 0.0);
  s.start_jitter = number(doc, "start_jitter", 0.0);
  s.heading_jitter = deg2rad(number(doc, "heading_jitter_deg", 0.0));
  s.perception_interval = integer(doc, "perception_interval", s.perception_interval);
  s.dt = number(doc, "dt", s.dt);
  s.max_steps = integer(doc, "max_steps", s.max_steps);
  s.lut_rigs = integer(doc, "lut_rigs", s.lut_rigs);
  if (s.pixel_noise < 0.0 || s.start_jitter < 0.0 || s.heading_jitter < 0.0) {
    throw ConfigError("noise and jitter fields must be >= 0");
  }
  if (s.perception_interval < 1) throw ConfigError("field 'perception_interval' must be >= 1");
  if (!(s.dt > 0.0)) throw ConfigError("field 'dt' must be positive");
  if (s.max_steps < 1 || s.max_steps > 50000) throw ConfigError("field 'max_steps' must be in [1, 50000]");
  if (s.lut_rigs < 1) throw ConfigError("field 'lut_rigs' must be >= 1");
  for (const PixelRect* r : {&s.scale_area_a, &s.scale_area_b}) {
    if (!r->inside(s.avm.width(), s.avm.height())) throw ConfigError("scale area outside the AVM");
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return load_scenario(read_file(path), base.empty() ? "." : base);
}

std::vector<TrialRecord> run_scenario(const Scenario& scenario, const RunOptions& options) {
  const std::uint64_t seed = options.seed.value_or(scenario.seed);
  const std::string out = options.out_dir.value_or(scenario.out_dir);
  std::vector<TrialRecord> records;
  for (int i = 0; i < scenario.trials; ++i) {
    const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(i);
    std::string dump_dir;
    if (options.dump_frames) dump_dir = out + "/frames/trial_" + std::to_string(i);
    switch (scenario.experiment) {
      case ExperimentKind::LoopReturn:
        records.push_back(run_loop_return_trial(scenario, i, trial_seed, dump_dir));
        break;
      case ExperimentKind::ArrowRate:
        records.push_back(run_arrow_trial(scenario, i, trial_seed, dump_dir));
        break;
      case ExperimentKind::Parking:
        records.push_back(run_parking_trial(scenario, i, trial_seed, dump_dir));
        break;
      case ExperimentKind::LutBench:
        records.push_back(run_lut_trial(scenario, i, trial_seed));
        break;
    }
  }
  return records;
}

namespace {

std::string opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << *v;
  return os.str();
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> parse_opt(const std::string& s, const std::string& field) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("records: bad number in column '" + field + "': " + s);
  }
}

constexpr const char* kRecordHeader =
    "scenario,experiment,trial,success,distance_error_m,heading_error_deg,clearance_m,steps,phases,note";

}  // namespace

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << kRecordHeader << '\n';
  for (const TrialRecord& r : records) {
    out << sanitize(r.scenario) << ',' << to_string(r.experiment) << ',' << r.trial << ','
        << (r.success ? 1 : 0) << ',' << opt(r.distance_error_m) << ',' << opt(r.heading_error_deg)
        << ',' << opt(r.clearance_m) << ',' << r.steps << ',' << sanitize(r.phases) << ','
        << sanitize(r.note) << '\n';
  }
}

void write_runtimes_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << "scenario,trial,runtime_ms,speedup\n";
  for (const TrialRecord& r : records) {
    out << sanitize(r.scenario) << ',' << r.trial << ',' << opt(r.runtime_ms) << ',' << opt(r.speedup)
        << '\n';
  }
}

std::vector<TrialRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("records: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordHeader) throw ConfigError("records: unexpected header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw ConfigError("records: expected 10 columns, got " + std::to_string(f.size()));
    TrialRecord r;
    r.scenario = f[0];
    if (f[1] == "loop-return") r.experiment = ExperimentKind::LoopReturn;
    else if (f[1] == "arrow-rate") r.experiment = ExperimentKind::ArrowRate;
    else if (f[1] == "parking") r.experiment = ExperimentKind::Parking;
    else if (f[1] == "lut-bench") r.experiment = ExperimentKind::LutBench;
    else throw ConfigError("records: unknown experiment '" + f[1] + "'");
    r.trial = static_cast<int>(parse_opt(f[2], "trial").value_or(0));
    r.success = f[3] == "1";
    r.distance_error_m = parse_opt(f[4], "distance_error_m");
    r.heading_error_deg = parse_opt(f[5], "heading_error_deg");
    r.clearance_m = parse_opt(f[6], "clearance_m");
    r.steps = static_cast<int>(parse_opt(f[7], "steps").value_or(0));
    r.phases = f[8];
    r.note = f[9];
    out.push_back(r);
  }
  return out;
}

void read_runtimes_csv(std::istream& in, std::vector<TrialRecord>& records) {
  std::string line;
  if (!std::getline(in, line)) return;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw ConfigError("runtimes: expected 4 columns");
    for (TrialRecord& r : records) {
      if (r.scenario == f[0] && std::to_string(r.trial) == f[1]) {
        r.runtime_ms = parse_opt(f[2], "runtime_ms").value_or(0.0);
        r.speedup = parse_opt(f[3], "speedup");
      }
    }
  }
}

}  // namespace valet
