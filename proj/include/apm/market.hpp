#pragma once

#include <cstdint>
#include <set>
#include <span>

namespace apm {

using FollowerId = std::uint32_t;

/// One SMU's private parameters. `popa` is H^T, `gain` is the per-change
/// privacy gain.
struct SmuParams {
  FollowerId id = 0;
  double alpha = 15.0;
  double popa = 1.5;
  double gain = 0.0;
  double gamma = 1.75;
  double mu = 30.0;
  double mu_th = 15.0;
  double tau = 0.04;
  double tau_th = 0.08;
  int x = 0;
  double omega1 = 0.5;
  double omega2 = 0.5;
  int model_m = 0;
  int model_n = 0;
};

/// Leader costs, weights and market limits.
struct LaParams {
  double c = 5.0;
  double c_a = 1.0;
  double c_l = 0.2;
  double phi_d = 1.0;
  double kappa = 0.05;
  double lambda_m = 0.3;
  double lambda_n = 3.0;
  double f = 312000.0;
  double g_m = 60000.0;
  double g_n = 600000.0;
  double eta1 = 0.5;
  double eta2 = 0.5;
  double r_max = 100.0;
  double p_max = 25.0;
};

/// Models already cached on the edge server nearest to a follower.
struct ModelCache {
  std::set<int> cached_m;
  std::set<int> cached_n;
};

/// A follower as the leader sees it in the market.
struct Follower {
  SmuParams smu;
  ModelCache cache;
};

/// A follower together with the number of pseudonyms it buys.
struct FollowerDemand {
  const Follower* follower = nullptr;
  double r = 0.0;
};

/// Throws DomainError naming the first violated invariant.
void validate(const SmuParams& smu);
void validate(const LaParams& la);

double smu_pid_utility(const SmuParams& smu, double p, double r);
double smu_avatar_utility(const SmuParams& smu, double c_a);
double smu_total_utility(const SmuParams& smu, double p, double r, double c_a);

double model_switch_cost(const SmuParams& smu, const ModelCache& cache, const LaParams& la);
/// Switch + transmission + computation cost of one avatar regeneration.
double avatar_service_cost(const SmuParams& smu, const ModelCache& cache, const LaParams& la);

double la_pid_utility(double p, double r, const LaParams& la);
double la_avatar_utility(const SmuParams& smu, const ModelCache& cache, const LaParams& la);
double la_total_utility(double p, std::span<const FollowerDemand> population, const LaParams& la);

enum class RoundingMode { None, Floor, Nearest };

/// Post-hoc integer rendering of a continuous demand.
double round_demand(double r, RoundingMode mode);

}  // namespace apm
