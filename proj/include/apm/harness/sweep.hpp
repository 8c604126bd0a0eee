#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apm/harness/config.hpp"

namespace apm::harness {

struct SweepRow {
  double sweep_value = 0.0;
  Method method = Method::EquilibriumDerived;
  std::uint64_t seed = 0;
  double la_utility = 0.0;
  double price = 0.0;
  double total_demand = 0.0;
  double wall_ms = 0.0;
  std::optional<std::string> error;
};

/// Seed of a follower draw for (seed, sweep value index); shared by all
/// methods so they face the same market.
std::uint64_t market_seed(std::uint64_t seed, std::size_t value_index);
/// Seed of a method's own randomness in one cell.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t value_index, std::size_t method_index);

/// Scenario with the sweep axis set to `value`.
Scenario scenario_at(const ExperimentConfig& config, double value);

/// One row per (value, method, seed), in that nesting order. A failing cell
/// yields a row with `error` set; the sweep continues.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

}  // namespace apm::harness
