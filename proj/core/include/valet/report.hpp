#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "valet/scenario.hpp"

namespace valet {

/// Aggregates of one (scenario, experiment) group. Means and maxima are over the
/// records where the value is defined; success rate is over all records.
struct SummaryRow {
  std::string scenario;
  ExperimentKind experiment = ExperimentKind::LoopReturn;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::optional<double> mean_distance_m;
  std::optional<double> max_distance_m;
  std::optional<double> mean_heading_deg;
  std::optional<double> max_heading_deg;
  std::optional<double> mean_clearance_m;
  std::optional<double> mean_speedup;
};

/// Groups in order of first appearance. Throws PreconditionError on empty input.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
/// Fixed-width table for the console.
void print_summary(const std::vector<SummaryRow>& rows, std::ostream& out);

}  // namespace valet
