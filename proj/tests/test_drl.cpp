#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "apm/drl/baselines.hpp"
#include "apm/drl/env.hpp"
#include "apm/drl/network.hpp"
#include "apm/drl/policy.hpp"
#include "apm/drl/ppo.hpp"
#include "apm/drl/train.hpp"
#include "apm/scenario.hpp"
#include "apm/stackelberg.hpp"
#include "support.hpp"

using namespace apm;
using namespace apm::drl;

namespace {

PolicyNetwork small_net(int inputs, int hidden, std::uint64_t seed) {
  PolicyNetwork net(inputs, hidden, Vector::Constant(inputs, 2.0));
  std::mt19937_64 rng(seed);
  net.initialize(rng);
  return net;
}

std::vector<Sample> random_samples(const PolicyNetwork& net, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> shift(-0.05, 0.05);
  std::vector<Sample> out;
  for (int i = 0; i < count; ++i) {
    Sample s;
    s.observation = Vector::NullaryExpr(net.inputs(), [&] { return normal(rng); });
    const auto o = net.forward(s.observation);
    s.pre_squash = o.loc + o.scale * normal(rng);
    // Keep ratios strictly inside the clip band so the loss is smooth.
    s.old_log_prob = gaussian_log_prob(s.pre_squash, o.loc, o.scale) + shift(rng);
    s.advantage = normal(rng);
    s.target = normal(rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("env reset") {
  PricingEnv env(Scenario{}, EnvConfig{});
  const Vector first = env.reset(17);
  CHECK(first.size() == 4 * (1 + 6));
  CHECK(first.isZero());
  CHECK(env.state().u_max == -std::numeric_limits<double>::infinity());
  const auto hidden = env.state().hidden;
  env.reset(17);
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    CHECK(env.state().hidden[i].smu.gamma == hidden[i].smu.gamma);
    CHECK(env.state().hidden[i].smu.mu == hidden[i].smu.mu);
    CHECK(env.state().hidden[i].smu.tau == hidden[i].smu.tau);
    CHECK(env.state().hidden[i].smu.gain == doctest::Approx(test::kGain).epsilon(1e-12));
  }
  env.reset(18);
  CHECK(env.state().hidden[0].smu.gamma != hidden[0].smu.gamma);

  PricingEnv total(Scenario{}, EnvConfig{64, 4, ObservationMode::Total, RecordScope::Episode});
  CHECK(total.reset(1).size() == 8);
}

TEST_CASE("env window and rewards") {
  PricingEnv env(Scenario{}, EnvConfig{8, 4});
  env.reset(3);
  auto s = env.step(12.0);
  CHECK(s.reward == 1);
  CHECK(s.observation[21] == 12.0);  // newest round sits last
  const double u12 = s.la_utility;

  s = env.step(test::kDerivedPrice);  // better
  CHECK(s.reward == 1);
  CHECK(s.la_utility > u12);
  const double best = s.la_utility;

  s = env.step(11.0);  // worse
  CHECK(s.reward == 0);
  CHECK(env.state().u_max == best);

  s = env.step(test::kDerivedPrice);  // ties count as a hit
  CHECK(s.la_utility == best);
  CHECK(s.reward == 1);

  s = env.step(20.0);
  CHECK(s.observation[0] == test::kDerivedPrice);  // oldest of the last four
  CHECK(s.observation[21] == 20.0);
  CHECK(s.total_demand == 0.0);
}

TEST_CASE("env reward bookkeeping") {
  PricingEnv env(Scenario{}, EnvConfig{64, 4});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> price(5, 25);
  for (int episode = 0; episode < 20; ++episode) {
    env.reset(episode);
    double previous = -std::numeric_limits<double>::infinity();
    int hits = 0, rewards = 0;
    for (bool done = false; !done;) {
      const auto s = env.step(price(rng));
      CHECK(env.state().u_max >= previous);
      if (s.la_utility >= previous) ++hits;
      previous = env.state().u_max;
      rewards += s.reward;
      done = s.done;
    }
    CHECK(rewards == hits);
    CHECK(rewards <= 64);
    CHECK(env.state().k == 64);
  }
  CHECK_THROWS(env.step(8.0));
}

TEST_CASE("env clamps out-of-range prices") {
  PricingEnv env(Scenario{}, EnvConfig{});
  env.reset(1);
  auto s = env.step(100.0);
  CHECK(s.clamped);
  CHECK(s.price == 25.0);
  s = env.step(-3.0);
  CHECK(s.price == 5.0);
  CHECK(env.clamped_actions() == 2);
}

TEST_CASE("env equilibrium matches the solver") {
  PricingEnv env(Scenario{}, EnvConfig{});
  env.reset(9);
  CHECK(env.equilibrium_utility() == doctest::Approx(test::kDerivedUtility).epsilon(1e-12));
  CHECK(env.utility_at(test::kDerivedPrice) == doctest::Approx(test::kDerivedUtility).epsilon(1e-12));
}

TEST_CASE("policy support and determinism") {
  const auto net = small_net(28, 16, 2);
  const ActionBounds bounds{5.0, 25.0};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const Vector obs = Vector::NullaryExpr(28, [&] { return normal(rng); });
  std::size_t outside = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double p = policy_act(obs, net, bounds, rng).price;
    if (!(p >= 5.0 && p <= 25.0)) ++outside;
  }
  CHECK(outside == 0);

  const auto det = policy_act(obs, net, bounds, rng, true);
  CHECK(det.price > 5.0);
  CHECK(det.price < 25.0);
  CHECK(det.price == bounds.to_price(net.forward(obs).loc));

  std::mt19937_64 a(77), b(77);
  const auto x = policy_act(obs, net, bounds, a);
  const auto y = policy_act(obs, net, bounds, b);
  CHECK(x.price == y.price);
  CHECK(x.log_density == y.log_density);
  CHECK(x.log_density == doctest::Approx(price_log_density(x.price, net.forward(obs).loc, net.forward(obs).scale, bounds)));
}

TEST_CASE("squashed density integrates to one") {
  const ActionBounds bounds{5.0, 25.0};
  for (auto [loc, scale] : {std::pair{0.0, 1.0}, std::pair{0.4, 0.3}, std::pair{-1.2, 0.8}, std::pair{0.1, 0.05}}) {
    constexpr int n = 10000;
    const double h = (bounds.hi - bounds.lo) / n;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) mass += std::exp(price_log_density(bounds.lo + (i + 0.5) * h, loc, scale, bounds)) * h;
    CHECK(std::abs(mass - 1.0) <= 1e-3);
  }
}

TEST_CASE("ppo gradient matches finite differences") {
  auto net = small_net(6, 4, 11);
  const auto samples = random_samples(net, 16, 12);
  PpoConfig config;
  Vector grad;
  ppo_loss(net, samples, config, &grad);
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
    const double saved = net.parameters()[i];
    net.parameters()[i] = saved + h;
    const double up = ppo_loss(net, samples, config).total;
    net.parameters()[i] = saved - h;
    const double down = ppo_loss(net, samples, config).total;
    net.parameters()[i] = saved;
    const double fd = (up - down) / (2 * h);
    const double rel = std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, rel);
  }
  MESSAGE("max relative error " << worst);
  CHECK(worst <= 1e-4);
}

TEST_CASE("zero advantages leave only value and entropy terms") {
  const auto net = small_net(6, 4, 3);
  auto samples = random_samples(net, 8, 4);
  for (auto& s : samples) s.advantage = 0.0;
  PpoConfig config;
  config.value_coef = 0.0;
  config.entropy_coef = 0.0;
  Vector grad;
  const auto terms = ppo_loss(net, samples, config, &grad);
  CHECK(terms.surrogate == 0.0);
  CHECK(grad.isZero());

  config.value_coef = 0.5;
  ppo_loss(net, samples, config, &grad);
  CHECK_FALSE(grad.isZero());
}

TEST_CASE("positive advantage raises the action's likelihood") {
  auto net = small_net(6, 8, 5);
  std::mt19937_64 rng(6);
  const Vector obs = Vector::Constant(6, 0.3);
  const auto act = policy_act(obs, net, {5.0, 25.0}, rng);
  Transition t{obs, act.pre_squash, act.log_prob, 0.0, 1.0, true};
  std::vector<Trajectory> batch{{t}};
  PpoConfig config;
  config.entropy_coef = 0.0;
  config.epochs = 1;
  CHECK(build_samples(batch, config)[0].advantage == 1.0);
  Adam adam(net.parameter_count(), 1e-4);
  ppo_update(batch, net, adam, config, rng);
  const auto out = net.forward(obs);
  CHECK(gaussian_log_prob(act.pre_squash, out.loc, out.scale) > act.log_prob);
}

TEST_CASE("generalized advantage estimates") {
  PpoConfig config;
  config.normalize_advantages = false;
  config.discount = 0.9;
  config.gae_lambda = 0.5;
  const Vector o = Vector::Zero(1);
  Trajectory traj{{o, 0, 0, 0.5, 1.0, false}, {o, 0, 0, 0.2, 0.0, true}};
  const auto samples = build_samples(std::vector<Trajectory>{traj}, config);
  // delta1 = 0 - 0.2 = -0.2; delta0 = 1 + 0.9*0.2 - 0.5 = 0.68
  CHECK(samples[1].advantage == doctest::Approx(-0.2));
  CHECK(samples[0].advantage == doctest::Approx(0.68 + 0.45 * -0.2));
  CHECK(samples[0].target == doctest::Approx(samples[0].advantage + 0.5));
}

TEST_CASE("adam first step") {
  Adam adam(2, 0.1);
  Vector p = Vector::Zero(2);
  Vector g(2);
  g << 3.0, -0.01;
  adam.apply(p, g);
  CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("non-finite gradients abort the update") {
  auto net = small_net(6, 4, 1);
  net.parameters()[0] = std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(1);
  Transition t{Vector::Constant(6, 1.0), 0.1, -1.0, 0.0, 1.0, true};
  Adam adam(net.parameter_count(), 1e-3);
  CHECK_THROWS_AS(ppo_update(std::vector<Trajectory>{{t}}, net, adam, PpoConfig{}, rng), std::runtime_error);
  CHECK_THROWS(ppo_update(std::vector<Trajectory>{}, net, adam, PpoConfig{}, rng));
}

TEST_CASE("random baseline price mean") {
  RandomPolicy policy({5.0, 25.0});
  std::mt19937_64 rng(10);
  double sum = 0.0;
  const Vector obs;
  for (int i = 0; i < 100000; ++i) sum += policy.act(obs, rng);
  CHECK(std::abs(sum / 100000.0 - 15.0) <= 0.15);
}

TEST_CASE("greedy baseline locks near the equilibrium") {
  PricingEnv env(Scenario{}, EnvConfig{64, 4});
  GreedyPolicy greedy({5.0, 25.0});
  std::mt19937_64 rng(1);
  Vector obs = env.reset(2);
  greedy.begin_episode();
  std::vector<double> prices;
  for (bool done = false; !done;) {
    const auto s = env.step(greedy.act(obs, rng));
    greedy.observe(s.price, s.la_utility);
    prices.push_back(s.price);
    obs = s.observation;
    done = s.done;
  }
  CHECK_FALSE(greedy.sweeping());
  for (std::size_t k = 33; k < prices.size(); ++k) CHECK(prices[k] == prices[32]);
  CHECK(std::abs(prices[32] - test::kDerivedPrice) <= 20.0 / 31.0);
}

TEST_CASE("evaluation summaries") {
  PricingEnv env(Scenario{}, EnvConfig{64, 4});
  auto random = baseline_policy(BaselineKind::Random, {5.0, 25.0});
  auto greedy = baseline_policy(BaselineKind::Greedy, {5.0, 25.0});
  const auto r = evaluate(*random, env, 5, 100, 1);
  const auto g = evaluate(*greedy, env, 5, 100, 1);
  CHECK(r.mean_equilibrium_utility == doctest::Approx(test::kDerivedUtility));
  CHECK(r.mean_utility < r.mean_equilibrium_utility);
  CHECK(g.mean_utility > r.mean_utility);
  const auto again = evaluate(*random, env, 5, 100, 1);
  CHECK(again.mean_utility == r.mean_utility);
}

TEST_CASE("train config validation") {
  TrainConfig config;
  CHECK_NOTHROW(validate(config));
  config.hidden_width = 0;
  CHECK_THROWS(validate(config));
  config = TrainConfig{};
  config.ppo.clip_ratio = 1.0;
  CHECK_THROWS(validate(config));
  config = TrainConfig{};
  config.episodes = 0;
  CHECK_THROWS(train(config, Scenario{}));
}

TEST_CASE("training is deterministic") {
  TrainConfig config;
  config.episodes = 8;
  config.episode_length = 16;
  config.hidden_width = 8;
  config.episodes_per_batch = 2;
  config.seed = 42;
  const auto a = train(config, Scenario{});
  const auto b = train(config, Scenario{});
  REQUIRE(a.curve.size() == 8);
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].mean_utility == b.curve[i].mean_utility);
    CHECK(a.curve[i].mean_price == b.curve[i].mean_price);
    CHECK(a.curve[i].reward_rate == b.curve[i].reward_rate);
  }
  CHECK(a.policy.parameters() == b.policy.parameters());
  config.seed = 43;
  CHECK(train(config, Scenario{}).policy.parameters() != a.policy.parameters());
}

TEST_CASE("checkpoint round trip") {
  const auto net = small_net(28, 8, 3);
  const auto path = std::filesystem::temp_directory_path() / "apm_test_checkpoint.bin";
  save_checkpoint(net, path);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.inputs() == net.inputs());
  CHECK(loaded.hidden() == net.hidden());
  CHECK(loaded.parameters() == net.parameters());
  CHECK(loaded.input_scale() == net.input_scale());
  CHECK(std::filesystem::file_size(path) == 8 + 4 + 4 + 8 + 8 * (28 + net.parameter_count()));
  std::filesystem::resize_file(path, 20);
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}
