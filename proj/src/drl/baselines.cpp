#include "apm/drl/baselines.hpp"

#include <stdexcept>

namespace apm::drl {

double RandomPolicy::act(const Vector& /*observation*/, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(bounds_.lo, bounds_.hi)(rng);
}

GreedyPolicy::GreedyPolicy(ActionBounds bounds, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("greedy grid needs at least two points");
  for (int j = 0; j < grid_points; ++j) {
    grid_.push_back(bounds.lo + (bounds.hi - bounds.lo) * j / (grid_points - 1));
  }
}

void GreedyPolicy::begin_episode() {
  next_ = 0;
  have_best_ = false;
}

double GreedyPolicy::act(const Vector& /*observation*/, std::mt19937_64& /*rng*/) {
  if (sweeping()) return grid_[next_++];
  return best_price_;
}

void GreedyPolicy::observe(double price, double utility) {
  if (!have_best_ || utility > best_utility_) {
    best_price_ = price;
    best_utility_ = utility;
    have_best_ = true;
  }
}

double LearnedPolicy::act(const Vector& observation, std::mt19937_64& rng) {
  return policy_act(observation, net_, bounds_, rng, deterministic_).price;
}

std::unique_ptr<PricingPolicy> baseline_policy(BaselineKind kind, ActionBounds bounds) {
  if (kind == BaselineKind::Random) return std::make_unique<RandomPolicy>(bounds);
  return std::make_unique<GreedyPolicy>(bounds);
}

EvalSummary evaluate(PricingPolicy& policy, PricingEnv& env, int episodes, std::uint64_t seed_base,
                     std::uint64_t policy_seed) {
  if (episodes <= 0) throw std::invalid_argument("evaluation needs at least one episode");
  std::mt19937_64 rng(policy_seed);
  EvalSummary sum;
  long steps = 0;
  for (int e = 0; e < episodes; ++e) {
    Vector obs = env.reset(seed_base + static_cast<std::uint64_t>(e));
    sum.mean_equilibrium_utility += env.equilibrium_utility();
    policy.begin_episode();
    for (bool done = false; !done;) {
      const double price = policy.act(obs, rng);
      const auto step = env.step(price);
      policy.observe(step.price, step.la_utility);
      sum.mean_utility += step.la_utility;
      sum.reward_rate += step.reward;
      sum.mean_price += step.price;
      sum.mean_total_demand += step.total_demand;
      ++steps;
      obs = step.observation;
      done = step.done;
    }
  }
  sum.mean_utility /= static_cast<double>(steps);
  sum.reward_rate /= static_cast<double>(steps);
  sum.mean_price /= static_cast<double>(steps);
  sum.mean_total_demand /= static_cast<double>(steps);
  sum.mean_equilibrium_utility /= episodes;
  return sum;
}

}  // namespace apm::drl
