// valet-sim: scenario runner and metrics reporter.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "valet/avm.hpp"
#include "valet/errors.hpp"
#include "valet/report.hpp"
#include "valet/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

void write_file(const fs::path& path, const std::vector<valet::TrialRecord>& records,
                void (*writer)(const std::vector<valet::TrialRecord>&, std::ostream&)) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw valet::ConfigError("cannot write '" + path.string() + "'");
  writer(records, out);
}

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed, bool dump,
            std::optional<std::string> out_dir) {
  const valet::Scenario s = valet::load_scenario_file(scenario_path);
  valet::RunOptions opts;
  opts.seed = seed;
  opts.dump_frames = dump;
  opts.out_dir = out_dir;
  const fs::path out = out_dir.value_or(s.out_dir);
  fs::create_directories(out);
  const auto records = valet::run_scenario(s, opts);
  write_file(out / "records.csv", records, valet::write_records_csv);
  write_file(out / "runtimes.csv", records, valet::write_runtimes_csv);
  valet::print_summary(valet::summarize(records), std::cout);
  std::cout << "wrote " << (out / "records.csv").string() << '\n';
  return 0;
}

int cmd_report(const std::string& records_path) {
  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw valet::ConfigError("cannot open '" + records_path + "'");
  auto records = valet::read_records_csv(in);
  const fs::path runtimes = fs::path(records_path).parent_path() / "runtimes.csv";
  if (std::ifstream rt(runtimes, std::ios::binary); rt) valet::read_runtimes_csv(rt, records);
  const auto rows = valet::summarize(records);
  valet::print_summary(rows, std::cout);
  const fs::path summary = fs::path(records_path).parent_path() / "summary.csv";
  std::ofstream out(summary, std::ios::binary);
  if (!out) throw valet::ConfigError("cannot write '" + summary.string() + "'");
  valet::write_summary_csv(rows, out);
  return 0;
}

int cmd_bench(int size, int rigs, int image_size) {
  valet::Scenario s;
  s.name = "bench-lut";
  s.experiment = valet::ExperimentKind::LutBench;
  s.avm.extent_forward = size * s.avm.resolution;
  s.avm.extent_lateral = size * s.avm.resolution;
  s.avm.validate();
  s.lut_rigs = rigs;
  s.image_size = image_size;
  const valet::TrialRecord r = valet::run_lut_trial(s, 0, 1);
  std::cout << "avm " << s.avm.width() << "x" << s.avm.height() << ", " << rigs << " rigs, "
            << (r.success ? "bit-identical" : r.note) << '\n'
            << "total " << r.runtime_ms << " ms, speedup " << r.speedup.value_or(0.0) << "x\n";
  return r.success ? 0 : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Valet parking simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  bool dump = false;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run every trial of a scenario");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Base seed override");
  run->add_flag("--dump-frames", dump, "Write AVM frames as PGM");
  run->add_option("--out", out_dir, "Output directory");

  std::string records_path;
  auto* report = app.add_subcommand("report", "Summarize a records CSV");
  report->add_option("records", records_path, "records.csv")->required();

  int size = 600;
  int rigs = 20;
  int image_size = 800;
  auto* bench = app.add_subcommand("bench-lut", "Compare LUT remap against direct projection");
  bench->add_option("--size", size, "AVM side in pixels")->check(CLI::Range(16, 4000));
  bench->add_option("--rigs", rigs, "Random rigs")->check(CLI::Range(1, 10000));
  bench->add_option("--image-size", image_size, "Fisheye image side")->check(CLI::Range(16, 4000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(scenario_path, seed, dump, out_dir);
    if (*report) return cmd_report(records_path);
    if (*bench) return cmd_bench(size, rigs, image_size);
  } catch (const valet::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const valet::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}
