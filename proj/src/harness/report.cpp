#include "apm/harness/report.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

namespace apm::harness {

namespace {

std::string number(double v) { return std::isnan(v) ? "nan" : fmt::format("{}", v); }

struct Cell {
  double utility = 0.0;
  double price = 0.0;
  double demand = 0.0;
  int ok = 0;
  int failed = 0;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

std::string format_csv(std::span<const SweepRow> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{:.3f}\n", number(r.sweep_value), to_string(r.method), r.seed,
                       number(r.la_utility), number(r.price), number(r.total_demand), r.wall_ms);
  }
  return out;
}

std::string format_summary(std::span<const SweepRow> rows) {
  // Keyed by (value, method) in sweep order.
  std::map<std::pair<double, int>, Cell> cells;
  for (const auto& r : rows) {
    auto& cell = cells[{r.sweep_value, static_cast<int>(r.method)}];
    if (r.error) {
      ++cell.failed;
      continue;
    }
    cell.utility += r.la_utility;
    cell.price += r.price;
    cell.demand += r.total_demand;
    ++cell.ok;
  }
  bool any_ok = false;
  for (auto& [key, cell] : cells) {
    if (cell.ok > 0) {
      cell.utility /= cell.ok;
      cell.price /= cell.ok;
      cell.demand /= cell.ok;
      any_ok = true;
    }
  }
  if (!any_ok) return "no successful cells\n";

  std::string out = fmt::format("{:>12} {:>24} {:>14} {:>12} {:>14} {:>6} {:>7} {:>21}\n", "sweep_value", "method",
                                "mean_utility", "mean_price", "mean_demand", "cells", "failed", "drl_over_equilibrium");
  for (const auto& [key, cell] : cells) {
    const auto method = static_cast<Method>(key.second);
    std::string ratio = "-";
    if (method == Method::Drl && cell.ok > 0) {
      for (Method reference : {Method::EquilibriumDerived, Method::EquilibriumPaperForm}) {
        const auto it = cells.find({key.first, static_cast<int>(reference)});
        if (it != cells.end() && it->second.ok > 0 && it->second.utility != 0.0) {
          ratio = fmt::format("{:.4f}", cell.utility / it->second.utility);
          break;
        }
      }
    }
    if (cell.ok == 0) {
      out += fmt::format("{:>12} {:>24} {:>14} {:>12} {:>14} {:>6} {:>7} {:>21}\n", number(key.first),
                         to_string(method), "nan", "nan", "nan", 0, cell.failed, ratio);
    } else {
      out += fmt::format("{:>12} {:>24} {:>14.6f} {:>12.6f} {:>14.6f} {:>6} {:>7} {:>21}\n", number(key.first),
                         to_string(method), cell.utility, cell.price, cell.demand, cell.ok, cell.failed, ratio);
    }
  }
  return out;
}

ReportFiles emit_report(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("emit_report needs at least one row");
  ReportFiles files;
  files.csv = path;
  files.summary = path;
  files.summary.replace_extension(".summary.txt");
  for (const auto& r : rows) {
    if (r.error) files.any_failure = true;
    else files.any_success = true;
  }
  write_file(files.csv, format_csv(rows));
  write_file(files.summary, format_summary(rows));
  return files;
}

}  // namespace apm::harness
