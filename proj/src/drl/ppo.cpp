#include "apm/drl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace apm::drl {

void validate(const PpoConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(c.discount > 0.0 && c.discount <= 1.0, "discount must be in (0, 1]");
  require(c.gae_lambda > 0.0 && c.gae_lambda <= 1.0, "gae_lambda must be in (0, 1]");
  require(c.clip_ratio > 0.0 && c.clip_ratio < 1.0, "clip_ratio must be in (0, 1)");
  require(c.epochs > 0, "epochs must be positive");
  require(c.minibatch > 0, "minibatch must be positive");
  require(c.step_size > 0.0, "step_size must be positive");
  require(c.entropy_coef >= 0.0, "entropy_coef must be nonnegative");
  require(c.value_coef > 0.0, "value_coef must be positive");
  require(c.max_grad_norm > 0.0, "max_grad_norm must be positive");
}

std::vector<Sample> build_samples(std::span<const Trajectory> batch, const PpoConfig& config) {
  std::vector<Sample> out;
  for (const auto& traj : batch) {
    std::vector<double> adv(traj.size());
    double running = 0.0;
    for (std::size_t t = traj.size(); t-- > 0;) {
      const auto& tr = traj[t];
      double next_value = 0.0;
      if (!tr.done) next_value = t + 1 < traj.size() ? traj[t + 1].value : tr.value;
      if (tr.done) running = 0.0;
      const double delta = tr.reward + config.discount * next_value - tr.value;
      running = delta + config.discount * config.gae_lambda * running;
      adv[t] = running;
    }
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto& tr = traj[t];
      out.push_back({tr.observation, tr.pre_squash, tr.log_prob, adv[t], adv[t] + tr.value});
    }
  }
  if (config.normalize_advantages && out.size() > 1) {
    double mean = 0.0;
    for (const auto& s : out) mean += s.advantage;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (const auto& s : out) var += (s.advantage - mean) * (s.advantage - mean);
    const double sd = std::sqrt(var / static_cast<double>(out.size()));
    if (sd > 1e-8) {
      for (auto& s : out) s.advantage = (s.advantage - mean) / sd;
    }
  }
  return out;
}

LossTerms ppo_loss(const PolicyNetwork& net, std::span<const Sample> samples, const PpoConfig& config, Vector* grad) {
  LossTerms terms;
  if (samples.empty()) return terms;
  if (grad) *grad = Vector::Zero(net.parameter_count());
  const double n = static_cast<double>(samples.size());
  const double lo = 1.0 - config.clip_ratio;
  const double hi = 1.0 + config.clip_ratio;
  const double entropy_const = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

  PolicyNetwork::Trace trace;
  for (const auto& s : samples) {
    const auto out = net.forward(s.observation, grad ? &trace : nullptr);
    const double z = (s.pre_squash - out.loc) / out.scale;
    const double log_prob = -0.5 * z * z - std::log(out.scale) - 0.5 * std::log(2.0 * std::numbers::pi);
    const double ratio = std::exp(log_prob - s.old_log_prob);
    const double unclipped = ratio * s.advantage;
    const double clipped = std::clamp(ratio, lo, hi) * s.advantage;
    const bool clip_active = clipped < unclipped;
    terms.surrogate += std::min(unclipped, clipped);
    if (ratio < lo || ratio > hi) terms.clip_fraction += 1.0;
    const double err = out.value - s.target;
    terms.value_loss += err * err;
    terms.entropy += std::log(out.scale) + entropy_const;

    if (grad) {
      // d(-surrogate)/d log_prob is -ratio * A on the unclipped branch.
      const double d_logp = clip_active ? 0.0 : -unclipped / n;
      const double d_loc = d_logp * z / out.scale;
      const double d_scale = d_logp * (z * z - 1.0) / out.scale - config.entropy_coef / (n * out.scale);
      const double d_value = config.value_coef * 2.0 * err / n;
      net.backward(trace, d_loc, d_scale, d_value, *grad);
    }
  }
  terms.surrogate /= n;
  terms.value_loss /= n;
  terms.entropy /= n;
  terms.clip_fraction /= n;
  terms.total = -terms.surrogate + config.value_coef * terms.value_loss - config.entropy_coef * terms.entropy;
  return terms;
}

Adam::Adam(Eigen::Index size, double step_size, double beta1, double beta2, double eps)
    : m_(Vector::Zero(size)), v_(Vector::Zero(size)), step_size_(step_size), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::apply(Vector& params, const Vector& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= step_size_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

Diagnostics ppo_update(std::span<const Trajectory> batch, PolicyNetwork& net, Adam& optimizer,
                       const PpoConfig& config, std::mt19937_64& rng) {
  const auto samples = build_samples(batch, config);
  if (samples.empty()) throw std::invalid_argument("ppo_update needs a nonempty batch");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Diagnostics diag;
  std::vector<Sample> minibatch;
  Vector grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.minibatch));
      minibatch.clear();
      for (std::size_t i = start; i < end; ++i) minibatch.push_back(samples[order[i]]);
      const auto terms = ppo_loss(net, minibatch, config, &grad);
      if (!grad.allFinite()) {
        throw std::runtime_error(fmt::format(
            "non-finite gradient (epoch {}, surrogate {}, value loss {}, entropy {})", epoch, terms.surrogate,
            terms.value_loss, terms.entropy));
      }
      const double norm = grad.norm();
      if (norm > config.max_grad_norm) grad *= config.max_grad_norm / norm;
      optimizer.apply(net.parameters(), grad);
      diag.surrogate += terms.surrogate;
      diag.clip_fraction += terms.clip_fraction;
      diag.value_loss += terms.value_loss;
      diag.entropy += terms.entropy;
      ++diag.updates;
    }
  }
  const double k = static_cast<double>(diag.updates);
  diag.surrogate /= k;
  diag.clip_fraction /= k;
  diag.value_loss /= k;
  diag.entropy /= k;
  return diag;
}

}  // namespace apm::drl
