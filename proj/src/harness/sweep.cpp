#include "apm/harness/sweep.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "apm/drl/baselines.hpp"
#include "apm/drl/train.hpp"
#include "apm/stackelberg.hpp"

namespace apm::harness {

namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct CellResult {
  double utility = 0.0;
  double price = 0.0;
  double demand = 0.0;
};

CellResult run_cell(const ExperimentConfig& config, const Scenario& scenario, Method method, std::uint64_t market,
                    std::uint64_t own) {
  switch (method) {
    case Method::EquilibriumDerived:
    case Method::EquilibriumPaperForm: {
      const auto population = sample_population(scenario, market);
      const auto mode = method == Method::EquilibriumDerived ? SolverMode::Derived : SolverMode::PaperForm;
      const auto eq = solve(population, scenario.la, mode);
      return {eq.la_utility, eq.p_star, eq.total_demand()};
    }
    case Method::Random:
    case Method::Greedy: {
      drl::PricingEnv env(scenario, drl::env_config(config.train));
      auto policy = drl::baseline_policy(method == Method::Random ? drl::BaselineKind::Random : drl::BaselineKind::Greedy,
                                         {scenario.la.c, scenario.la.p_max});
      const auto eval = drl::evaluate(*policy, env, config.eval_episodes, market, own);
      return {eval.mean_utility, eval.mean_price, eval.mean_total_demand};
    }
    case Method::Drl: {
      auto train_config = config.train;
      train_config.seed = own;
      const auto result = drl::train(train_config, scenario);
      return {drl::tail_mean_utility(result.curve), drl::tail_mean_price(result.curve),
              drl::tail_mean_demand(result.curve)};
    }
  }
  return {};
}

}  // namespace

std::uint64_t market_seed(std::uint64_t seed, std::size_t value_index) { return mix(mix(seed) ^ value_index); }

std::uint64_t cell_seed(std::uint64_t seed, std::size_t value_index, std::size_t method_index) {
  return mix(market_seed(seed, value_index) ^ (0x5EEDULL + method_index));
}

Scenario scenario_at(const ExperimentConfig& config, double value) {
  Scenario s = config.scenario;
  if (config.axis == SweepAxis::LambdaBar) {
    s.lambda_bar = value;
  } else {
    s.popa = value;
    s.popa_profile.clear();
  }
  return s;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  validate(config);
  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < config.sweep_values.size(); ++v) {
    const double value = config.sweep_values[v];
    const Scenario scenario = scenario_at(config, value);
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const Method method = config.methods[m];
      for (const std::uint64_t seed : config.seeds) {
        SweepRow row;
        row.sweep_value = value;
        row.method = method;
        row.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        try {
          // Method index is the method's enum value so adding a method to
          // the list does not reseed the others.
          const auto result = run_cell(config, scenario, method, market_seed(seed, v),
                                       cell_seed(seed, v, static_cast<std::size_t>(method)));
          row.la_utility = result.utility;
          row.price = result.price;
          row.total_demand = result.demand;
        } catch (const std::exception& e) {
          row.error = e.what();
          row.la_utility = row.price = row.total_demand = std::numeric_limits<double>::quiet_NaN();
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace apm::harness
