#pragma once

#include <random>

#include "apm/drl/network.hpp"

namespace apm::drl {

/// Price interval the squashed action is mapped onto.
struct ActionBounds {
  double lo = 0.0;
  double hi = 1.0;

  /// lo + (tanh(u) + 1) / 2 * (hi - lo)
  double to_price(double pre_squash) const;
  /// log |d price / d u|
  double log_jacobian(double pre_squash) const;
};

struct PolicySample {
  double price = 0.0;
  double pre_squash = 0.0;   ///< Gaussian draw before tanh
  double log_prob = 0.0;     ///< log density of `pre_squash`
  double log_density = 0.0;  ///< log density of `price` on [lo, hi]
  double value = 0.0;
};

double gaussian_log_prob(double x, double loc, double scale);

/// Log density of a price under the squashed Gaussian N(loc, scale).
double price_log_density(double price, double loc, double scale, const ActionBounds& bounds);

/// Samples a price. In deterministic mode the scale is ignored and the
/// squashed location is returned.
PolicySample policy_act(const Vector& observation, const PolicyNetwork& net, const ActionBounds& bounds,
                        std::mt19937_64& rng, bool deterministic = false);

}  // namespace apm::drl
