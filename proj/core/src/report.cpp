#include "valet/report.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "valet/errors.hpp"

namespace valet {
namespace {

struct Acc {
  double sum = 0.0;
  double max = 0.0;
  int n = 0;

  void add(const std::optional<double>& v) {
    if (!v) return;
    sum += *v;
    max = n == 0 ? *v : std::max(max, *v);
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / n;
  }
  std::optional<double> maximum() const {
    if (n == 0) return std::nullopt;
    return max;
  }
};

std::string fmt(const std::optional<double>& v, int precision) {
  if (!v) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw PreconditionError("report: no records");
  std::vector<SummaryRow> rows;
  std::vector<std::array<Acc, 4>> accs;
  for (const TrialRecord& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
      return s.scenario == r.scenario && s.experiment == r.experiment;
    });
    if (it == rows.end()) {
      rows.push_back({});
      rows.back().scenario = r.scenario;
      rows.back().experiment = r.experiment;
      accs.emplace_back();
      it = rows.end() - 1;
    }
    const auto i = static_cast<std::size_t>(it - rows.begin());
    ++it->trials;
    if (r.success) ++it->successes;
    accs[i][0].add(r.distance_error_m);
    accs[i][1].add(r.heading_error_deg);
    accs[i][2].add(r.clearance_m);
    accs[i][3].add(r.speedup);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SummaryRow& s = rows[i];
    s.success_rate = static_cast<double>(s.successes) / s.trials;
    s.mean_distance_m = accs[i][0].mean();
    s.max_distance_m = accs[i][0].maximum();
    s.mean_heading_deg = accs[i][1].mean();
    s.max_heading_deg = accs[i][1].maximum();
    s.mean_clearance_m = accs[i][2].mean();
    s.mean_speedup = accs[i][3].mean();
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "scenario,experiment,trials,successes,success_rate,mean_distance_m,max_distance_m,"
         "mean_heading_deg,max_heading_deg,mean_clearance_m,mean_speedup\n";
  for (const SummaryRow& s : rows) {
    out << s.scenario << ',' << to_string(s.experiment) << ',' << s.trials << ',' << s.successes
        << ',' << fmt(s.success_rate, 6) << ',' << fmt(s.mean_distance_m, 6) << ','
        << fmt(s.max_distance_m, 6) << ',' << fmt(s.mean_heading_deg, 6) << ','
        << fmt(s.max_heading_deg, 6) << ',' << fmt(s.mean_clearance_m, 6) << ','
        << fmt(s.mean_speedup, 3) << '\n';
  }
}

void print_summary(const std::vector<SummaryRow>& rows, std::ostream& out) {
  auto cell = [](const std::optional<double>& v, double k, int p) {
    return v ? fmt(*v * k, p) : std::string("-");
  };
  out << std::left << std::setw(20) << "scenario" << std::setw(12) << "experiment" << std::right
      << std::setw(8) << "success" << std::setw(9) << "rate%" << std::setw(11) << "mean d cm"
      << std::setw(10) << "max d cm" << std::setw(11) << "mean h deg" << std::setw(10) << "max h deg"
      << std::setw(11) << "clear cm" << std::setw(9) << "speedup" << '\n';
  for (const SummaryRow& s : rows) {
    std::ostringstream succ;
    succ << s.successes << '/' << s.trials;
    out << std::left << std::setw(20) << s.scenario << std::setw(12) << to_string(s.experiment)
        << std::right << std::setw(8) << succ.str() << std::setw(9) << fmt(100.0 * s.success_rate, 1)
        << std::setw(11) << cell(s.mean_distance_m, 100.0, 2) << std::setw(10)
        << cell(s.max_distance_m, 100.0, 2) << std::setw(11) << cell(s.mean_heading_deg, 1.0, 2)
        << std::setw(10) << cell(s.max_heading_deg, 1.0, 2) << std::setw(11)
        << cell(s.mean_clearance_m, 100.0, 2) << std::setw(9) << cell(s.mean_speedup, 1.0, 1)
        << '\n';
  }
}

}  // namespace valet
