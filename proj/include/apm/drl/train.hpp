#pragma once

#include <cstdint>
#include <vector>

#include "apm/drl/env.hpp"
#include "apm/drl/network.hpp"
#include "apm/drl/ppo.hpp"
#include "apm/scenario.hpp"

namespace apm::drl {

enum class Resampling { PerEpisode, Fixed };

struct TrainConfig {
  int episodes = 2000;
  int episode_length = 64;
  int window = 4;
  int hidden_width = 64;
  int episodes_per_batch = 4;
  std::uint64_t seed = 1;
  Resampling resample = Resampling::PerEpisode;
  ObservationMode observe = ObservationMode::PerFollower;
  RecordScope record_scope = RecordScope::Episode;
  PpoConfig ppo;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const TrainConfig& config);

struct EpisodeRecord {
  int episode = 0;
  double mean_utility = 0.0;
  double reward_rate = 0.0;
  double mean_price = 0.0;
  double mean_total_demand = 0.0;
  double equilibrium_utility = 0.0;
};

struct TrainResult {
  std::vector<EpisodeRecord> curve;
  PolicyNetwork policy;
};

/// Deterministic given `config.seed`.
TrainResult train(const TrainConfig& config, const Scenario& scenario);

/// Mean of the last `n` episodes' utilities (all episodes if fewer).
double tail_mean_utility(const std::vector<EpisodeRecord>& curve, int n = 100);
double tail_mean_equilibrium(const std::vector<EpisodeRecord>& curve, int n = 100);
double tail_mean_price(const std::vector<EpisodeRecord>& curve, int n = 100);
double tail_mean_demand(const std::vector<EpisodeRecord>& curve, int n = 100);

EnvConfig env_config(const TrainConfig& config);

}  // namespace apm::drl
