#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "apm/market.hpp"

namespace apm {

/// Which closed-form follower response the solver uses.
///   Derived:   r = max(0, alpha/p - (1 + H^T)/gain), the zero of dU/dr.
///   PaperForm: r = max(0, (alpha/p - 1/gain)(1 + H^T)).
/// Both are of the shape r = max(0, A/p - B).
enum class SolverMode { Derived, PaperForm };

enum class Binding { None, RMax, PMax, PMin };

std::string_view to_string(SolverMode mode);
std::string_view to_string(Binding binding);
std::optional<SolverMode> parse_solver_mode(std::string_view text);

struct EquilibriumResult {
  double p_star = 0.0;
  std::vector<double> r_star;
  std::vector<FollowerId> active_set;
  double la_utility = 0.0;
  std::vector<double> smu_utilities;
  SolverMode mode = SolverMode::Derived;
  Binding binding = Binding::None;
  /// Set when even p_max oversubscribes r_max and demands were scaled down.
  bool capacity_warning = false;

  double total_demand() const;
};

/// Coefficients of r(p) = max(0, A/p - B) for one follower.
struct DemandCurve {
  double a = 0.0;
  double b = 0.0;

  /// Price at and above which the follower buys nothing.
  double threshold() const { return a / b; }
  double at(double p) const;
};

DemandCurve demand_curve(const SmuParams& smu, SolverMode mode);

double best_response(const SmuParams& smu, double p, SolverMode mode);

/// Stationary point of sum (p - c) r_i(p) with every follower active:
/// sqrt(c * sum A_i / sum B_i).
double optimal_price_unconstrained(std::span<const SmuParams> population, const LaParams& la, SolverMode mode);

/// Constrained equilibrium over c <= p <= p_max and sum r <= r_max.
/// Throws InfeasibleError when nobody buys anywhere in [c, p_max].
EquilibriumResult solve(std::span<const Follower> population, const LaParams& la, SolverMode mode);

/// Bisection tolerance on price and iteration cap used by `solve`.
inline constexpr double kPriceTolerance = 1e-10;
inline constexpr int kMaxBisectionIterations = 200;

struct GridOptimum {
  double price = 0.0;
  double utility = 0.0;
};

/// Brute-force leader optimum over `grid_points` uniformly spaced prices in
/// [c, p_max]. Prices where total demand exceeds r_max are infeasible and
/// skipped. Ties go to the lowest price. Requires grid_points >= 1000.
GridOptimum oracle_grid_search(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                               std::size_t grid_points);

/// Leader utility at each grid price (NaN where r_max is violated).
std::vector<double> oracle_utility_curve(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                                         std::size_t grid_points);

struct ConcavityReport {
  std::size_t follower_checks = 0;
  std::size_t leader_checks = 0;
  std::size_t follower_violations = 0;
  std::size_t leader_violations = 0;
  std::size_t flat = 0;

  std::size_t violations() const { return follower_violations + leader_violations; }
};

/// Randomized second-difference checks of the follower utility in r and the
/// substituted leader objective in p. Differences indistinguishable from
/// round-off are counted as flat, not as violations.
ConcavityReport verify_concavity(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                                 std::size_t samples, std::uint64_t seed);

}  // namespace apm
