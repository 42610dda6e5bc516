// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "valet/report.hpp"
#include "valet/scenario.hpp"

namespace {

using namespace valet;
using Clock = std::chrono::steady_clock;

const std::string kScenarios = std::string(VALET_PRESETS_DIR) + "/scenarios/";

int g_failed = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++g_failed;
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SummaryRow run_preset(const std::string& file, std::vector<TrialRecord>* out = nullptr) {
  const Scenario s = load_scenario_file(kScenarios + file);
  auto recs = run_scenario(s);
  const SummaryRow row = summarize(recs).front();
  for (const TrialRecord& r : recs) {
    if (!r.success) fmt::print("  note {} trial {}: {}\n", s.name, r.trial, r.note);
  }
  if (out) *out = std::move(recs);
  return row;
}

void lut_equivalence() {
  const Scenario s = load_scenario_file(kScenarios + "lut_bench.json");
  const TrialRecord r = run_lut_trial(s, 0, s.seed);
  const double secs = r.runtime_ms / 1000.0;
  const double speedup = r.speedup.value_or(0.0);
  verdict(r.success && s.lut_rigs >= 100 && secs < 5.0 && speedup >= 5.0, "lut_oracle_equivalence",
          fmt::format("{} rigs {}x{} bit-exact={} total {:.2f} s speedup {:.1f}x", s.lut_rigs,
                      s.avm.width(), s.avm.height(), r.success ? "yes" : "no", secs, speedup));
}

void loop_return() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const char* p : {"indoor_loop.json", "small_outdoor_loop.json", "large_outdoor_loop.json"}) {
    const SummaryRow row = run_preset(p);
    const double d = row.mean_distance_m.value_or(1e9);
    const double h = row.mean_heading_deg.value_or(1e9);
    ok = ok && row.trials == 5 && d <= 0.12 && h <= 20.0;
    detail += fmt::format("{} {:.1f} cm / {:.1f} deg ({}/{} closed); ", row.scenario, 100 * d, h,
                          row.successes, row.trials);
  }
  const SummaryRow nf = run_preset("noise_free_loop.json");
  const double nd = nf.max_distance_m.value_or(1e9);
  const double nh = nf.max_heading_deg.value_or(1e9);
  ok = ok && nd <= 1e-3 && nh <= 0.1;
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  detail += fmt::format("noise-free {:.3f} mm / {:.4f} deg; {:.1f} s", 1000 * nd, nh, secs);
  verdict(ok, "loop_return_error", detail);
}

void arrow_recognition() {
  bool ok = true;
  std::string detail;
  struct Case {
    const char* file;
    double floor;
  };
  for (const Case c : {Case{"small_outdoor_arrows.json", 0.8}, Case{"large_outdoor_arrows.json", 0.8},
                       Case{"indoor_arrows.json", 0.7}, Case{"glare_free_arrows.json", 1.0}}) {
    const SummaryRow row = run_preset(c.file);
    ok = ok && row.trials >= 20 && row.success_rate >= c.floor;
    detail += fmt::format("{} {}/{} (need {:.0f}%); ", row.scenario, row.successes, row.trials, 100 * c.floor);
  }
  verdict(ok, "arrow_recognition_rate", detail);
}

void parking_success() {
  bool ok = true;
  std::string detail;
  struct Case {
    const char* file;
    int need;
  };
  for (const Case c : {Case{"small_outdoor_parking.json", 6}, Case{"large_outdoor_parking.json", 6},
                       Case{"indoor_parking.json", 5}, Case{"noise_free_parking.json", 1}}) {
    const SummaryRow row = run_preset(c.file);
    const int trials_needed = c.need == 1 ? 1 : 8;
    ok = ok && row.trials == trials_needed && row.successes >= c.need;
    detail += fmt::format("{} {}/{} (need {}); ", row.scenario, row.successes, row.trials, c.need);
  }
  verdict(ok, "parking_success_rate", detail);
}

void scale_recovery() {
  const double resolution = 0.005, separation_px = 200.0, line_m = 0.3;
  bool ok = true;
  std::string detail;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    OdometryModel clean;
    clean.scale = sigma;
    const double exact = *run_scale_recovery(clean, resolution, separation_px, line_m).slam_to_topo;
    const double err0 = std::abs(exact * sigma - 1.0);
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      OdometryModel noisy = clean;
      // 1% of the per-step travel at cruise speed.
      noisy.translation_noise = 0.01 * VehicleParams{}.cruise_speed * 0.02;
      noisy.heading_noise = 0.01 * deg2rad(1.0);
      noisy.seed = seed;
      const double est = *run_scale_recovery(noisy, resolution, separation_px, line_m).slam_to_topo;
      worst = std::max(worst, std::abs(est * sigma - 1.0));
    }
    ok = ok && err0 <= 1e-6 && worst <= 0.02;
    detail += fmt::format("sigma {} clean {:.1e} noisy {:.2f}%; ", sigma, err0, 100 * worst);
  }
  verdict(ok, "scale_recovery", detail);
}

void property_suites() {
  const std::string cmd = std::string("\"") + VALET_PROPERTY_BIN + "\" --gtest_brief=1 > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  verdict(rc == 0, "property_suites", fmt::format("standalone property binary exit status {}", rc));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only(argv + 1, argv + argc);
  auto wanted = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  try {
    if (wanted("lut")) lut_equivalence();
    if (wanted("loop")) loop_return();
    if (wanted("arrows")) arrow_recognition();
    if (wanted("parking")) parking_success();
    if (wanted("scale")) scale_recovery();
    if (wanted("properties")) property_suites();
  } catch (const std::exception& e) {
    verdict(false, "harness", e.what());
  }
  fmt::print("{} criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
