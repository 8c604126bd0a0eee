#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "apm/harness/sweep.hpp"

namespace apm::harness {

inline constexpr std::string_view kCsvHeader = "sweep_value,method,seed,la_utility,price,total_demand,wall_ms";

/// CSV text for `rows`; failed cells carry `nan` in their numeric columns.
std::string format_csv(std::span<const SweepRow> rows);

/// Per-(value, method) means plus the DRL / equilibrium utility ratio.
std::string format_summary(std::span<const SweepRow> rows);

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path summary;
  bool any_success = false;
  bool any_failure = false;
};

/// Writes `path` (CSV) and `path` with extension ".summary.txt".
/// Throws std::runtime_error naming the path on I/O failure.
ReportFiles emit_report(std::span<const SweepRow> rows, const std::filesystem::path& path);

}  // namespace apm::harness
