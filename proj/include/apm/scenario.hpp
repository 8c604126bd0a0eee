#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "apm/market.hpp"

namespace apm {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// A market: the leader plus the distributions its followers are drawn
/// from. Defaults are the reference setting of six followers spread over
/// three edge servers with three candidate models of each kind.
struct Scenario {
  LaParams la;
  std::size_t followers = 6;
  std::size_t servers = 3;
  int models_m = 3;
  int models_n = 3;

  double alpha = 15.0;
  double a = 1.0 / 160.0;
  double b = 1.0 / 10.0;
  double lambda_bar = 1.5;
  double popa = 1.5;  ///< common H^T unless `popa_profile` is set
  std::vector<double> popa_profile;
  double mu_th = 15.0;
  double tau_th = 0.08;
  double omega1 = 0.5;
  double omega2 = 0.5;
  int x = 0;

  Range gamma{1.5, 2.0};
  Range mu{20.0, 40.0};
  Range tau{0.02, 0.06};
};

void validate(const Scenario& scenario);

/// Draws the hidden follower parameters and edge caches. Follower i sits on
/// server i mod `servers`; each server starts with one cached model of each
/// kind. Deterministic in `seed`.
std::vector<Follower> sample_population(const Scenario& scenario, std::uint64_t seed);

}  // namespace apm
