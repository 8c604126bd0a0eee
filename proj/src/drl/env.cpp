#include "apm/drl/env.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "apm/stackelberg.hpp"

namespace apm::drl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int demand_slots(const Scenario& s, ObservationMode mode) {
  return mode == ObservationMode::PerFollower ? static_cast<int>(s.followers) : 1;
}

struct Quote {
  std::vector<double> demands;
  double total = 0.0;
  double utility = 0.0;
};

// Followers answer `price`; oversubscription of r_max is rationed pro rata.
Quote quote(const std::vector<Follower>& hidden, const LaParams& la, double price) {
  Quote q;
  for (const auto& f : hidden) {
    q.demands.push_back(best_response(f.smu, price, SolverMode::Derived));
    q.total += q.demands.back();
  }
  if (q.total > la.r_max) {
    for (auto& r : q.demands) r *= la.r_max / q.total;
    q.total = la.r_max;
  }
  std::vector<FollowerDemand> view;
  view.reserve(hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) view.push_back({&hidden[i], q.demands[i]});
  q.utility = la_total_utility(price, view, la);
  return q;
}

}  // namespace

PricingEnv::PricingEnv(Scenario scenario, EnvConfig config)
    : scenario_(std::move(scenario)), config_(config), history_max_(kNegInf) {
  validate(scenario_);
  if (config_.episode_length <= 0) throw std::invalid_argument("episode_length must be positive");
  if (config_.window <= 0) throw std::invalid_argument("window must be positive");
  state_.episode_length = config_.episode_length;
  state_.u_max = kNegInf;
}

Vector PricingEnv::reset(std::uint64_t seed) { return reset(sample_population(scenario_, seed)); }

Vector PricingEnv::reset(std::vector<Follower> hidden) {
  if (hidden.empty()) throw std::invalid_argument("environment needs at least one follower");
  if (config_.observe == ObservationMode::PerFollower && hidden.size() != scenario_.followers) {
    throw std::invalid_argument("hidden population size differs from the scenario");
  }
  state_.hidden = std::move(hidden);
  state_.k = 0;
  state_.window.clear();
  state_.episode_length = config_.episode_length;
  state_.u_max = config_.record_scope == RecordScope::History ? history_max_ : kNegInf;
  return observation();
}

int PricingEnv::observation_size() const {
  return config_.window * (1 + demand_slots(scenario_, config_.observe));
}

Vector PricingEnv::observation() const {
  const int slots = demand_slots(scenario_, config_.observe);
  Vector obs = Vector::Zero(observation_size());
  // Oldest round first; missing rounds at the front stay zero.
  const int offset = config_.window - static_cast<int>(state_.window.size());
  for (std::size_t j = 0; j < state_.window.size(); ++j) {
    const Round& round = state_.window[j];
    const Eigen::Index at = static_cast<Eigen::Index>(offset + static_cast<int>(j)) * (1 + slots);
    obs[at] = round.price;
    if (config_.observe == ObservationMode::PerFollower) {
      for (int i = 0; i < slots; ++i) obs[at + 1 + i] = round.demands[i];
    } else {
      for (double r : round.demands) obs[at + 1] += r;
    }
  }
  return obs;
}

double PricingEnv::utility_at(double price) const { return quote(state_.hidden, scenario_.la, price).utility; }

StepResult PricingEnv::step(double price) {
  if (state_.hidden.empty()) throw std::logic_error("step before reset");
  if (state_.k >= state_.episode_length) throw std::logic_error("step after episode end");

  StepResult out;
  const double lo = scenario_.la.c;
  const double hi = scenario_.la.p_max;
  if (!(price >= lo && price <= hi)) {
    if (clamped_++ == 0) {
      std::clog << fmt::format("warning: price {} outside [{}, {}] clamped\n", price, lo, hi);
    }
    price = std::isnan(price) ? lo : std::clamp(price, lo, hi);
    out.clamped = true;
  }

  Quote q = quote(state_.hidden, scenario_.la, price);
  const double utility = q.utility;
  const double total = q.total;
  Round round{price, std::move(q.demands)};

  out.reward = utility >= state_.u_max ? 1 : 0;
  state_.u_max = std::max(state_.u_max, utility);
  history_max_ = std::max(history_max_, utility);

  state_.window.push_back(std::move(round));
  if (static_cast<int>(state_.window.size()) > config_.window) state_.window.pop_front();
  ++state_.k;

  out.observation = observation();
  out.done = state_.k >= state_.episode_length;
  out.price = price;
  out.la_utility = utility;
  out.total_demand = total;
  return out;
}

double PricingEnv::equilibrium_utility() const {
  return solve(state_.hidden, scenario_.la, SolverMode::Derived).la_utility;
}

Vector observation_scale(const Scenario& scenario, const EnvConfig& config) {
  const int slots = demand_slots(scenario, config.observe);
  const double demand_unit = config.observe == ObservationMode::PerFollower ? 1.0 : static_cast<double>(scenario.followers);
  Vector scale(config.window * (1 + slots));
  for (int j = 0; j < config.window; ++j) {
    scale[j * (1 + slots)] = scenario.la.p_max;
    for (int i = 0; i < slots; ++i) scale[j * (1 + slots) + 1 + i] = demand_unit;
  }
  return scale;
}

}  // namespace apm::drl
