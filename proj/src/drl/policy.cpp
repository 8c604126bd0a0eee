#include "apm/drl/policy.hpp"

#include <cmath>
#include <numbers>

namespace apm::drl {

namespace {

// log(1 - tanh(u)^2) without cancellation.
double log_sech2(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

}  // namespace

double ActionBounds::to_price(double pre_squash) const {
  return lo + 0.5 * (std::tanh(pre_squash) + 1.0) * (hi - lo);
}

double ActionBounds::log_jacobian(double pre_squash) const {
  return std::log(0.5 * (hi - lo)) + log_sech2(pre_squash);
}

double gaussian_log_prob(double x, double loc, double scale) {
  const double z = (x - loc) / scale;
  return -0.5 * z * z - std::log(scale) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double price_log_density(double price, double loc, double scale, const ActionBounds& bounds) {
  const double unit = 2.0 * (price - bounds.lo) / (bounds.hi - bounds.lo) - 1.0;
  const double u = std::atanh(unit);
  return gaussian_log_prob(u, loc, scale) - bounds.log_jacobian(u);
}

PolicySample policy_act(const Vector& observation, const PolicyNetwork& net, const ActionBounds& bounds,
                        std::mt19937_64& rng, bool deterministic) {
  const auto out = net.forward(observation);
  PolicySample s;
  s.value = out.value;
  s.pre_squash = deterministic ? out.loc : out.loc + out.scale * std::normal_distribution<double>(0.0, 1.0)(rng);
  s.price = bounds.to_price(s.pre_squash);
  s.log_prob = gaussian_log_prob(s.pre_squash, out.loc, out.scale);
  s.log_density = s.log_prob - bounds.log_jacobian(s.pre_squash);
  return s;
}

}  // namespace apm::drl
