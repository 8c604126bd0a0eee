#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string_view>
#include <vector>

#include "apm/drl/env.hpp"
#include "apm/drl/network.hpp"
#include "apm/drl/policy.hpp"

namespace apm::drl {

/// Anything that posts prices round by round and hears back its utility.
class PricingPolicy {
 public:
  virtual ~PricingPolicy() = default;
  virtual void begin_episode() {}
  virtual double act(const Vector& observation, std::mt19937_64& rng) = 0;
  virtual void observe(double /*price*/, double /*utility*/) {}
};

enum class BaselineKind { Random, Greedy };

/// Uniform price in [lo, hi] every round.
class RandomPolicy : public PricingPolicy {
 public:
  explicit RandomPolicy(ActionBounds bounds) : bounds_(bounds) {}
  double act(const Vector& observation, std::mt19937_64& rng) override;

 private:
  ActionBounds bounds_;
};

/// Posts every point of a fixed grid once, then keeps re-posting the grid
/// price with the best observed utility.
class GreedyPolicy : public PricingPolicy {
 public:
  explicit GreedyPolicy(ActionBounds bounds, int grid_points = 32);
  void begin_episode() override;
  double act(const Vector& observation, std::mt19937_64& rng) override;
  void observe(double price, double utility) override;

  bool sweeping() const { return next_ < grid_.size(); }

 private:
  std::vector<double> grid_;
  std::size_t next_ = 0;
  double best_price_ = 0.0;
  double best_utility_ = 0.0;
  bool have_best_ = false;
};

/// A trained network, sampling or acting on the squashed location.
class LearnedPolicy : public PricingPolicy {
 public:
  LearnedPolicy(PolicyNetwork net, ActionBounds bounds, bool deterministic)
      : net_(std::move(net)), bounds_(bounds), deterministic_(deterministic) {}
  double act(const Vector& observation, std::mt19937_64& rng) override;

 private:
  PolicyNetwork net_;
  ActionBounds bounds_;
  bool deterministic_;
};

std::unique_ptr<PricingPolicy> baseline_policy(BaselineKind kind, ActionBounds bounds);

struct EvalSummary {
  double mean_utility = 0.0;
  double reward_rate = 0.0;
  double mean_price = 0.0;
  double mean_total_demand = 0.0;
  double mean_equilibrium_utility = 0.0;
};

/// Runs `episodes` episodes; episode e resets the env with seed
/// `seed_base + e` so matched seeds see matched followers.
EvalSummary evaluate(PricingPolicy& policy, PricingEnv& env, int episodes, std::uint64_t seed_base,
                     std::uint64_t policy_seed);

}  // namespace apm::drl
