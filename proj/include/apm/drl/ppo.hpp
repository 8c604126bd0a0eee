#pragma once

#include <random>
#include <span>
#include <vector>

#include "apm/drl/network.hpp"

namespace apm::drl {

struct Transition {
  Vector observation;
  double pre_squash = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

using Trajectory = std::vector<Transition>;

struct PpoConfig {
  double discount = 0.95;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 10;
  int minibatch = 64;
  double step_size = 3e-4;
  double entropy_coef = 1e-3;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
};

void validate(const PpoConfig& config);

/// One training example after advantage estimation.
struct Sample {
  Vector observation;
  double pre_squash = 0.0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double target = 0.0;  ///< return the value head regresses on
};

/// Generalized advantage estimates with the value head as baseline. A
/// trajectory that ends without `done` bootstraps from its last value.
std::vector<Sample> build_samples(std::span<const Trajectory> batch, const PpoConfig& config);

struct LossTerms {
  double surrogate = 0.0;  ///< mean clipped surrogate (to be maximized)
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;  ///< -surrogate + c_v * value_loss - c_e * entropy
  double clip_fraction = 0.0;
};

/// Minibatch loss; fills `grad` (d total / d params) when non-null.
LossTerms ppo_loss(const PolicyNetwork& net, std::span<const Sample> samples, const PpoConfig& config,
                   Vector* grad = nullptr);

class Adam {
 public:
  explicit Adam(Eigen::Index size, double step_size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void apply(Vector& params, const Vector& grad);

 private:
  Vector m_, v_;
  double step_size_, beta1_, beta2_, eps_;
  long t_ = 0;
};

struct Diagnostics {
  double surrogate = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int updates = 0;
};

/// Clipped-surrogate policy update over shuffled minibatches for
/// `config.epochs` passes. Throws std::runtime_error on a non-finite gradient.
Diagnostics ppo_update(std::span<const Trajectory> batch, PolicyNetwork& net, Adam& optimizer,
                       const PpoConfig& config, std::mt19937_64& rng);

}  // namespace apm::drl
