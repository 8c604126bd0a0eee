#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

namespace apm::drl {

using Vector = Eigen::VectorXd;

/// Actor and critic MLPs over the same observation. Each has two tanh hidden
/// layers; the actor emits (location, raw scale), the critic a value.
/// All weights live in one flat vector so optimizers and checkpoints treat
/// the model as a point in R^n.
class PolicyNetwork {
 public:
  struct Output {
    double loc = 0.0;
    double scale = 1.0;
    double value = 0.0;
  };

  /// Activations kept from `forward` for `backward`.
  struct Trace {
    Vector input;
    Vector actor_h1, actor_h2;
    Vector critic_h1, critic_h2;
    double raw_scale = 0.0;
  };

  PolicyNetwork() = default;
  /// `input_scale` divides each observation entry before the first layer.
  PolicyNetwork(int inputs, int hidden, Vector input_scale);

  void initialize(std::mt19937_64& rng);

  int inputs() const { return inputs_; }
  int hidden() const { return hidden_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  const Vector& parameters() const { return params_; }
  Vector& parameters() { return params_; }
  const Vector& input_scale() const { return input_scale_; }

  Output forward(const Vector& observation, Trace* trace = nullptr) const;

  /// Accumulates into `grad` the parameter gradient given dL/dloc,
  /// dL/dscale and dL/dvalue at the traced point.
  void backward(const Trace& trace, double d_loc, double d_scale, double d_value, Vector& grad) const;

  /// Lower bound added after the softplus so the scale stays positive.
  static constexpr double kMinScale = 1e-4;

 private:
  struct Layout {
    Eigen::Index w1, b1, w2, b2, w3, b3;
  };
  Layout layout(Eigen::Index base, int outputs) const;
  Eigen::Index actor_base() const { return 0; }
  Eigen::Index critic_base() const;

  int inputs_ = 0;
  int hidden_ = 0;
  Vector input_scale_;
  Vector params_;
};

/// Flat little-endian checkpoint:
///   "APMCKPT1" | u32 inputs | u32 hidden | u64 parameter count |
///   inputs x f64 input scale | count x f64 parameters
void save_checkpoint(const PolicyNetwork& net, const std::filesystem::path& path);
PolicyNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace apm::drl
