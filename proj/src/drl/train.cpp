#include "apm/drl/train.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "apm/drl/policy.hpp"

namespace apm::drl {

void validate(const TrainConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(c.episodes > 0, "episodes must be positive");
  require(c.episode_length > 0, "episode_length must be positive");
  require(c.window > 0, "window must be positive");
  require(c.hidden_width > 0, "hidden_width must be positive");
  require(c.episodes_per_batch > 0, "episodes_per_batch must be positive");
  validate(c.ppo);
}

EnvConfig env_config(const TrainConfig& c) { return {c.episode_length, c.window, c.observe, c.record_scope}; }

TrainResult train(const TrainConfig& config, const Scenario& scenario) {
  validate(config);
  PricingEnv env(scenario, env_config(config));
  const ActionBounds bounds{scenario.la.c, scenario.la.p_max};

  std::mt19937_64 rng(config.seed);
  PolicyNetwork net(env.observation_size(), config.hidden_width, observation_scale(scenario, env.config()));
  net.initialize(rng);
  Adam optimizer(net.parameter_count(), config.ppo.step_size);

  const std::uint64_t fixed_seed = rng();
  TrainResult result;
  std::vector<Trajectory> batch;
  for (int episode = 0; episode < config.episodes; ++episode) {
    const std::uint64_t episode_seed = config.resample == Resampling::PerEpisode ? rng() : fixed_seed;
    Vector obs = env.reset(episode_seed);

    EpisodeRecord record{episode, 0.0, 0.0, 0.0, 0.0, env.equilibrium_utility()};
    Trajectory traj;
    traj.reserve(static_cast<std::size_t>(config.episode_length));
    for (bool done = false; !done;) {
      const auto sample = policy_act(obs, net, bounds, rng);
      const auto step = env.step(sample.price);
      traj.push_back({obs, sample.pre_squash, sample.log_prob, sample.value, static_cast<double>(step.reward), step.done});
      record.mean_utility += step.la_utility;
      record.reward_rate += step.reward;
      record.mean_price += step.price;
      record.mean_total_demand += step.total_demand;
      obs = step.observation;
      done = step.done;
    }
    const double k = static_cast<double>(traj.size());
    record.mean_utility /= k;
    record.reward_rate /= k;
    record.mean_price /= k;
    record.mean_total_demand /= k;
    result.curve.push_back(record);

    batch.push_back(std::move(traj));
    if (static_cast<int>(batch.size()) == config.episodes_per_batch || episode + 1 == config.episodes) {
      ppo_update(batch, net, optimizer, config.ppo, rng);
      batch.clear();
    }
  }
  result.policy = std::move(net);
  return result;
}

namespace {

template <typename Field>
double tail_mean(const std::vector<EpisodeRecord>& curve, int n, Field field) {
  if (curve.empty()) return 0.0;
  const std::size_t take = std::min(curve.size(), static_cast<std::size_t>(std::max(n, 1)));
  double sum = 0.0;
  for (std::size_t i = curve.size() - take; i < curve.size(); ++i) sum += field(curve[i]);
  return sum / static_cast<double>(take);
}

}  // namespace

double tail_mean_utility(const std::vector<EpisodeRecord>& curve, int n) {
  return tail_mean(curve, n, [](const EpisodeRecord& r) { return r.mean_utility; });
}

double tail_mean_equilibrium(const std::vector<EpisodeRecord>& curve, int n) {
  return tail_mean(curve, n, [](const EpisodeRecord& r) { return r.equilibrium_utility; });
}

double tail_mean_price(const std::vector<EpisodeRecord>& curve, int n) {
  return tail_mean(curve, n, [](const EpisodeRecord& r) { return r.mean_price; });
}

double tail_mean_demand(const std::vector<EpisodeRecord>& curve, int n) {
  return tail_mean(curve, n, [](const EpisodeRecord& r) { return r.mean_total_demand; });
}

}  // namespace apm::drl
