#include "apm/scenario.hpp"

#include <random>

#include <fmt/format.h>

#include "apm/error.hpp"
#include "apm/popa.hpp"

namespace apm {

void validate(const Scenario& s) {
  validate(s.la);
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DomainError(what);
  };
  require(s.followers > 0, "followers must be positive");
  require(s.servers > 0, "servers must be positive");
  require(s.models_m > 0 && s.models_n > 0, "model counts must be positive");
  require(s.alpha > 0.0, "alpha must be positive");
  require(s.a > 0.0 && s.a < s.b && s.b <= 1.0, "hotspot bounds need 0 < a < b <= 1");
  require(s.lambda_bar > 0.0, "lambda_bar must be positive");
  require(s.mu_th > 0.0, "mu_th must be positive");
  require(s.tau_th > 0.0, "tau_th must be positive");
  require(s.x == 0 || s.x == 1, "avatars flag must be 0 or 1");
  require(s.gamma.lo > 0.0 && s.gamma.lo <= s.gamma.hi, "gamma range must be positive and ordered");
  require(s.mu.lo <= s.mu.hi, "mu range must be ordered");
  require(s.tau.lo > 0.0 && s.tau.lo <= s.tau.hi, "tau range must be positive and ordered");
  require(s.popa_profile.empty() || s.popa_profile.size() == s.followers,
          "popa_profile needs one entry per follower");
}

std::vector<Follower> sample_population(const Scenario& s, std::uint64_t seed) {
  validate(s);
  std::mt19937_64 rng(seed);
  auto uniform = [&](Range r) { return r.lo == r.hi ? r.lo : std::uniform_real_distribution<double>(r.lo, r.hi)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  std::vector<ModelCache> caches(s.servers);
  for (auto& cache : caches) {
    cache.cached_m.insert(pick(s.models_m));
    cache.cached_n.insert(pick(s.models_n));
  }

  const double gain = privacy_gain({s.lambda_bar, s.a, s.b});
  std::vector<Follower> out;
  out.reserve(s.followers);
  for (std::size_t i = 0; i < s.followers; ++i) {
    SmuParams smu;
    smu.id = static_cast<FollowerId>(i);
    smu.alpha = s.alpha;
    smu.popa = s.popa_profile.empty() ? s.popa : s.popa_profile[i];
    smu.gain = gain;
    smu.gamma = uniform(s.gamma);
    smu.mu = uniform(s.mu);
    smu.tau = uniform(s.tau);
    smu.mu_th = s.mu_th;
    smu.tau_th = s.tau_th;
    smu.x = s.x;
    smu.omega1 = s.omega1;
    smu.omega2 = s.omega2;
    smu.model_m = pick(s.models_m);
    smu.model_n = pick(s.models_n);
    out.push_back({smu, caches[i % s.servers]});
  }
  return out;
}

}  // namespace apm
