#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "apm/drl/network.hpp"
#include "apm/scenario.hpp"

namespace apm::drl {

enum class ObservationMode { PerFollower, Total };

/// Where the running utility maximum behind the hit reward lives.
///   Episode: reset to -inf at every reset (rewards count in-episode records).
///   History: kept across resets of the same environment object.
enum class RecordScope { Episode, History };

struct EnvConfig {
  int episode_length = 64;  ///< K
  int window = 4;           ///< L
  ObservationMode observe = ObservationMode::PerFollower;
  RecordScope record_scope = RecordScope::Episode;
};

struct Round {
  double price = 0.0;
  std::vector<double> demands;
};

struct EnvState {
  std::vector<Follower> hidden;
  int k = 0;
  double u_max = 0.0;
  std::deque<Round> window;
  int episode_length = 0;
};

struct StepResult {
  Vector observation;
  int reward = 0;
  bool done = false;
  double price = 0.0;
  double la_utility = 0.0;
  double total_demand = 0.0;
  bool clamped = false;
};

/// The leader's pricing problem with hidden followers. The agent sees only
/// the last L (price, demand) rounds; followers answer with closed-form
/// best responses.
class PricingEnv {
 public:
  PricingEnv(Scenario scenario, EnvConfig config);

  /// Samples fresh hidden followers from the scenario.
  Vector reset(std::uint64_t seed);
  /// Starts an episode against a given population.
  Vector reset(std::vector<Follower> hidden);

  StepResult step(double price);

  Vector observation() const;
  int observation_size() const;
  const EnvState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }
  const EnvConfig& config() const { return config_; }
  double price_floor() const { return scenario_.la.c; }
  double price_ceiling() const { return scenario_.la.p_max; }

  /// Leader utility at `price` against the current hidden followers.
  double utility_at(double price) const;
  /// Complete-information equilibrium utility for the current followers.
  double equilibrium_utility() const;

  std::size_t clamped_actions() const { return clamped_; }

 private:
  Scenario scenario_;
  EnvConfig config_;
  EnvState state_;
  double history_max_;
  std::size_t clamped_ = 0;
};

/// Per-entry divisors used to normalize observations for the network.
Vector observation_scale(const Scenario& scenario, const EnvConfig& config);

}  // namespace apm::drl
