#include "apm/market.hpp"

#include <cmath>

#include <fmt/format.h>

#include "apm/error.hpp"

namespace apm {

namespace {

constexpr double kWeightTolerance = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

void validate(const SmuParams& smu) {
  require(smu.alpha > 0.0, "alpha must be positive");
  require(smu.gain > 0.0, "gain must be positive");
  require(smu.gamma > 0.0, "gamma must be positive");
  require(smu.mu_th > 0.0, "mu_th must be positive");
  require(smu.tau > 0.0, "tau must be positive");
  require(smu.tau_th > 0.0, "tau_th must be positive");
  require(smu.x == 0 || smu.x == 1, "x must be 0 or 1");
  require(smu.omega1 >= 0.0 && smu.omega2 >= 0.0, "omega weights must be nonnegative");
  require(std::abs(smu.omega1 + smu.omega2 - 1.0) <= kWeightTolerance, "omega1 + omega2 must equal 1");
}

void validate(const LaParams& la) {
  require(la.c > 0.0, "c must be positive");
  require(la.p_max >= la.c, "p_max must be at least c");
  require(la.r_max > 0.0, "r_max must be positive");
  require(la.f > 0.0, "f must be positive");
  require(la.c_a >= 0.0, "c_a must be nonnegative");
  require(la.eta1 >= 0.0 && la.eta2 >= 0.0, "eta weights must be nonnegative");
  require(std::abs(la.eta1 + la.eta2 - 1.0) <= kWeightTolerance, "eta1 + eta2 must equal 1");
}

double smu_pid_utility(const SmuParams& smu, double p, double r) {
  const double arg = 1.0 + smu.popa + smu.gain * r;
  if (!(arg > 0.0)) {
    throw DomainError(fmt::format("privacy log argument {} is not positive", arg));
  }
  return smu.alpha * std::log(arg) - p * r;
}

double smu_avatar_utility(const SmuParams& smu, double c_a) {
  if (smu.x == 0) return 0.0;
  if (!(smu.mu_th > 0.0) || !(smu.tau > 0.0)) throw DomainError("quality thresholds must be positive");
  const double quality = smu.mu / smu.mu_th + smu.tau_th / smu.tau;
  if (!(quality > 0.0)) throw DomainError("avatar quality ratio is not positive");
  return smu.gamma * std::log(quality) - c_a;
}

double smu_total_utility(const SmuParams& smu, double p, double r, double c_a) {
  return smu.omega1 * smu_pid_utility(smu, p, r) + smu.omega2 * smu_avatar_utility(smu, c_a);
}

double model_switch_cost(const SmuParams& smu, const ModelCache& cache, const LaParams& la) {
  double cost = 0.0;
  if (!cache.cached_m.contains(smu.model_m)) cost += la.lambda_m;
  if (!cache.cached_n.contains(smu.model_n)) cost += la.lambda_n;
  return cost;
}

double avatar_service_cost(const SmuParams& smu, const ModelCache& cache, const LaParams& la) {
  if (!(la.f > 0.0)) throw DomainError("GPU capacity f must be positive");
  return model_switch_cost(smu, cache, la) + la.kappa + (la.g_m + la.g_n) / la.f;
}

double la_pid_utility(double p, double r, const LaParams& la) { return (p - la.c) * r; }

double la_avatar_utility(const SmuParams& smu, const ModelCache& cache, const LaParams& la) {
  if (smu.x == 0) return 0.0;
  return la.c_a - avatar_service_cost(smu, cache, la) - la.c_l * la.phi_d;
}

double la_total_utility(double p, std::span<const FollowerDemand> population, const LaParams& la) {
  double total = 0.0;
  for (const auto& [follower, r] : population) {
    total += la.eta1 * la_pid_utility(p, r, la) + la.eta2 * la_avatar_utility(follower->smu, follower->cache, la);
  }
  return total;
}

double round_demand(double r, RoundingMode mode) {
  switch (mode) {
    case RoundingMode::Floor: return std::floor(r);
    case RoundingMode::Nearest: return std::round(r);
    case RoundingMode::None: break;
  }
  return r;
}

}  // namespace apm
