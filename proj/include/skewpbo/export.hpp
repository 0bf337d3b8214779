#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "skewpbo/experiment.hpp"

namespace skewpbo {

enum class ExportFormat { Csv, Json };

/// Throws InvalidArgument.
ExportFormat parse_export_format(std::string_view name);

/// One row per (benchmark, mode, surrogate, acquisition) in first-seen order.
struct SummaryEntry {
  std::string benchmark, mode, surrogate, acquisition;
  std::size_t trials = 0;
  std::size_t failed = 0;
  double optimum = 0.0;
  /// Median of the final feasible objective over non-failed trials; an
  /// infeasible final reference counts as -infinity.
  double median_final_objective = 0.0;
  double median_final_regret = 0.0;
  /// max |SS| of the stored posterior curve, NaN when there is none.
  double curve_max_abs_skewness = 0.0;
};

std::vector<SummaryEntry> summarize_trials(const std::vector<TrialRecord>& records);

/// Writes results, summary, curves (when any record carries one) and timings
/// tables into dir. Everything except the timings file is a deterministic
/// function of the records. Returns the written paths. Throws IoError, and
/// InvalidArgument for an empty record list.
std::vector<std::filesystem::path> export_results(const std::vector<TrialRecord>& records,
                                                  const std::filesystem::path& dir, ExportFormat format);

/// records.json (without wall times) and timings.json.
void save_records(const std::vector<TrialRecord>& records, const std::filesystem::path& dir);
/// Reads what save_records wrote; timings are optional. Throws IoError.
std::vector<TrialRecord> load_records(const std::filesystem::path& dir);

}  // namespace skewpbo
