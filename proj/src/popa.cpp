#include "apm/popa.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "apm/error.hpp"

namespace apm {

double collision_probability(std::uint32_t r_n, std::uint32_t r_l) {
  if (r_n < 2 || r_l < 1) {
    throw DomainError(fmt::format("random part needs r_n >= 2 and r_l >= 1 (got {}, {})", r_n, r_l));
  }
  return std::pow(static_cast<double>(r_n), -static_cast<double>(r_l));
}

double compute_popa(const AvatarAttributeProfile& p) {
  if (p.s_attr == 0 || p.s_total == 0 || p.t_attr == 0 || p.t_total == 0) {
    throw DomainError("PoPA point counts must be positive");
  }
  if (p.s_attr > p.s_total || p.t_attr > p.t_total) {
    throw DomainError("attribute point count exceeds total");
  }
  const double arg = static_cast<double>(p.s_attr) / static_cast<double>(p.s_total) +
                     static_cast<double>(p.t_attr) / static_cast<double>(p.t_total) +
                     collision_probability(p.r_n, p.r_l);
  return -std::log2(arg);
}

double privacy_gain(const PrivacyGainParams& params) {
  const auto [lambda, a, b] = params;
  if (!(lambda > 0.0)) throw DomainError("privacy gain requires lambda > 0");
  if (!(a > 0.0) || !(a < b) || !(b <= 1.0)) throw DomainError("privacy gain requires 0 < a < b <= 1");
  const double slope = (b * std::log2(b) - a * std::log2(a)) / (b - a);
  return lambda / (lambda + 1.0) * (1.0 + (1.0 / std::numbers::ln2) - slope) - 1.0;
}

}  // namespace apm
