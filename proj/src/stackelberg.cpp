#include "apm/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "apm/error.hpp"

namespace apm {

std::string_view to_string(SolverMode mode) {
  return mode == SolverMode::Derived ? "derived" : "paper_form";
}

std::string_view to_string(Binding binding) {
  switch (binding) {
    case Binding::None: return "none";
    case Binding::RMax: return "r_max";
    case Binding::PMax: return "p_max";
    case Binding::PMin: return "p_min";
  }
  return "none";
}

std::optional<SolverMode> parse_solver_mode(std::string_view text) {
  if (text == "derived" || text == "DERIVED" || text == "EQUILIBRIUM_DERIVED") return SolverMode::Derived;
  if (text == "paper_form" || text == "paper" || text == "PAPER_FORM" || text == "EQUILIBRIUM_PAPER_FORM") {
    return SolverMode::PaperForm;
  }
  return std::nullopt;
}

double EquilibriumResult::total_demand() const { return std::accumulate(r_star.begin(), r_star.end(), 0.0); }

double DemandCurve::at(double p) const { return std::max(0.0, a / p - b); }

DemandCurve demand_curve(const SmuParams& smu, SolverMode mode) {
  if (!(smu.gain > 0.0)) throw DomainError("follower gain must be positive");
  const double base = 1.0 + smu.popa;
  if (mode == SolverMode::Derived) return {smu.alpha, base / smu.gain};
  return {smu.alpha * base, base / smu.gain};
}

double best_response(const SmuParams& smu, double p, SolverMode mode) {
  if (!(p > 0.0)) throw DomainError(fmt::format("best response needs a positive price (got {})", p));
  return demand_curve(smu, mode).at(p);
}

namespace {

double stationary_price(double c, double sum_a, double sum_b) { return std::sqrt(c * sum_a / sum_b); }

struct Curves {
  std::vector<DemandCurve> curves;

  double total(double p) const {
    double d = 0.0;
    for (const auto& curve : curves) d += curve.at(p);
    return d;
  }
};

Curves curves_of(std::span<const Follower> population, SolverMode mode) {
  Curves out;
  out.curves.reserve(population.size());
  for (const auto& f : population) out.curves.push_back(demand_curve(f.smu, mode));
  return out;
}

// Smallest price in [lo, hi] whose total demand fits in r_max. Demand is
// strictly decreasing wherever it is positive, so the root is unique.
double capacity_price(const Curves& curves, double r_max, double lo, double hi) {
  for (int it = 0; it < kMaxBisectionIterations && hi - lo > kPriceTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (curves.total(mid) > r_max) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double avatar_constant(std::span<const Follower> population, const LaParams& la) {
  double total = 0.0;
  for (const auto& f : population) total += la.eta2 * la_avatar_utility(f.smu, f.cache, la);
  return total;
}

}  // namespace

double optimal_price_unconstrained(std::span<const SmuParams> population, const LaParams& la, SolverMode mode) {
  if (population.empty()) throw DomainError("optimal price needs at least one follower");
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (const auto& smu : population) {
    const auto curve = demand_curve(smu, mode);
    sum_a += curve.a;
    sum_b += curve.b;
  }
  return stationary_price(la.c, sum_a, sum_b);
}

EquilibriumResult solve(std::span<const Follower> population, const LaParams& la, SolverMode mode) {
  if (population.empty()) throw DomainError("solve needs at least one follower");
  validate(la);
  const Curves curves = curves_of(population, mode);

  EquilibriumResult result;
  result.mode = mode;

  double lo = la.c;
  double price = la.c;
  double scale = 1.0;
  bool capacity_bound = false;

  if (curves.total(la.c) > la.r_max) {
    capacity_bound = true;
    if (curves.total(la.p_max) > la.r_max) {
      // Even the highest price oversubscribes; ration proportionally.
      price = la.p_max;
      scale = la.r_max / curves.total(la.p_max);
      result.capacity_warning = true;
    } else {
      lo = capacity_price(curves, la.r_max, la.c, la.p_max);
    }
  }

  if (!result.capacity_warning) {
    const double top = std::max_element(curves.curves.begin(), curves.curves.end(), [](const auto& x, const auto& y) {
                         return x.threshold() < y.threshold();
                       })->threshold();
    if (!(top > la.c)) {
      throw InfeasibleError(fmt::format("no follower buys at any price >= c = {}", la.c));
    }

    // Between consecutive participation thresholds the active set is fixed
    // and the leader objective is strictly concave, so each segment has a
    // clamped stationary point. The best segment wins, lowest price on ties.
    std::vector<double> cuts{lo};
    for (const auto& curve : curves.curves) {
      const double t = curve.threshold();
      if (t > lo && t < la.p_max) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(std::min(la.p_max, top));

    double best_value = -std::numeric_limits<double>::infinity();
    double best_stationary = lo;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double left = cuts[s];
      const double right = cuts[s + 1];
      if (right < left) continue;
      double sum_a = 0.0;
      double sum_b = 0.0;
      for (const auto& curve : curves.curves) {
        if (curve.threshold() > left) {
          sum_a += curve.a;
          sum_b += curve.b;
        }
      }
      if (sum_b <= 0.0) continue;
      const double stationary = stationary_price(la.c, sum_a, sum_b);
      const double candidate = std::clamp(stationary, left, right);
      double value = 0.0;
      for (const auto& curve : curves.curves) value += (candidate - la.c) * curve.at(candidate);
      if (value > best_value) {
        best_value = value;
        price = candidate;
        best_stationary = stationary;
      }
    }

    if (capacity_bound && price <= lo) {
      result.binding = Binding::RMax;
    } else if (price >= la.p_max && best_stationary > la.p_max) {
      result.binding = Binding::PMax;
    } else if (price <= la.c && best_stationary < la.c) {
      result.binding = Binding::PMin;
    }
  } else {
    result.binding = Binding::RMax;
  }

  result.p_star = price;
  std::vector<FollowerDemand> demands;
  demands.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    const double r = scale * curves.curves[i].at(price);
    result.r_star.push_back(r);
    if (r > 0.0) result.active_set.push_back(population[i].smu.id);
    result.smu_utilities.push_back(smu_total_utility(population[i].smu, price, r, la.c_a));
    demands.push_back({&population[i], r});
  }
  result.la_utility = la_total_utility(price, demands, la);
  return result;
}

namespace {

struct GridEvaluator {
  std::vector<const SmuParams*> followers;
  SolverMode mode;
  LaParams la;
  double constant = 0.0;
  double step = 0.0;
  std::size_t points = 0;

  double price_at(std::size_t j) const {
    return j + 1 == points ? la.p_max : la.c + static_cast<double>(j) * step;
  }

  // NaN marks an r_max violation.
  double utility_at(double p) const {
    double total_demand = 0.0;
    double pid = 0.0;
    for (const auto* smu : followers) {
      const double r = best_response(*smu, p, mode);
      total_demand += r;
      pid += la_pid_utility(p, r, la);
    }
    if (total_demand > la.r_max) return std::numeric_limits<double>::quiet_NaN();
    return la.eta1 * pid + constant;
  }
};

GridEvaluator make_evaluator(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                             std::size_t grid_points) {
  if (grid_points < 1000) throw std::invalid_argument("oracle grid needs at least 1000 points");
  GridEvaluator ev{{}, mode, la, avatar_constant(population, la), 0.0, grid_points};
  for (const auto& f : population) ev.followers.push_back(&f.smu);
  ev.step = (la.p_max - la.c) / static_cast<double>(grid_points - 1);
  return ev;
}

}  // namespace

std::vector<double> oracle_utility_curve(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                                         std::size_t grid_points) {
  const auto ev = make_evaluator(population, la, mode, grid_points);
  std::vector<double> curve(grid_points);
  for (std::size_t j = 0; j < grid_points; ++j) curve[j] = ev.utility_at(ev.price_at(j));
  return curve;
}

GridOptimum oracle_grid_search(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                               std::size_t grid_points) {
  const auto ev = make_evaluator(population, la, mode, grid_points);

  struct Partial {
    std::size_t index = 0;
    double utility = -std::numeric_limits<double>::infinity();
    bool found = false;
  };

  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  std::vector<Partial> partials(workers);
  auto scan = [&](std::size_t w) {
    const std::size_t begin = grid_points * w / workers;
    const std::size_t end = grid_points * (w + 1) / workers;
    Partial best;
    for (std::size_t j = begin; j < end; ++j) {
      const double u = ev.utility_at(ev.price_at(j));
      if (!std::isnan(u) && (!best.found || u > best.utility)) best = {j, u, true};
    }
    partials[w] = best;
  };
  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(scan, w);
  }

  // Subranges are in ascending price order, so a strict comparison keeps
  // the lowest-price winner on ties.
  Partial best;
  for (const auto& part : partials) {
    if (part.found && (!best.found || part.utility > best.utility)) best = part;
  }
  if (!best.found) {
    // Every grid price oversubscribes r_max: ration at p_max like `solve`.
    const double p = la.p_max;
    double total_demand = 0.0;
    for (const auto* smu : ev.followers) total_demand += best_response(*smu, p, mode);
    const double scale = la.r_max / total_demand;
    double pid = 0.0;
    for (const auto* smu : ev.followers) pid += la_pid_utility(p, scale * best_response(*smu, p, mode), la);
    return {p, la.eta1 * pid + ev.constant};
  }
  return {ev.price_at(best.index), best.utility};
}

ConcavityReport verify_concavity(std::span<const Follower> population, const LaParams& la, SolverMode mode,
                                 std::size_t samples, std::uint64_t seed) {
  ConcavityReport report;
  if (population.empty() || samples == 0) return report;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  constexpr double h = 1e-3;
  std::uniform_real_distribution<double> r_dist(h, 10.0);
  std::uniform_real_distribution<double> p_dist(la.c + h, std::max(la.c + 2 * h, la.p_max - h));

  // Round-off bound for a three-point second difference.
  auto classify = [](double lo, double mid, double hi, std::size_t& violations, std::size_t& flat) {
    const double d2 = lo - 2.0 * mid + hi;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(lo) + 2.0 * std::abs(mid) + std::abs(hi));
    if (std::abs(d2) <= noise) {
      ++flat;
    } else if (d2 > 0.0) {
      ++violations;
    }
  };

  std::vector<DemandCurve> curves;
  for (const auto& f : population) curves.push_back(demand_curve(f.smu, mode));
  // Substituted leader objective with the unclamped responses.
  auto leader = [&](double p) {
    double value = 0.0;
    for (const auto& curve : curves) value += (p - la.c) * (curve.a / p - curve.b);
    return la.eta1 * value;
  };

  for (std::size_t s = 0; s < samples; ++s) {
    const auto& smu = population[pick(rng)].smu;
    const double r = r_dist(rng);
    const double p = p_dist(rng);
    classify(smu_pid_utility(smu, p, r - h), smu_pid_utility(smu, p, r), smu_pid_utility(smu, p, r + h),
             report.follower_violations, report.flat);
    ++report.follower_checks;

    const double q = p_dist(rng);
    classify(leader(q - h), leader(q), leader(q + h), report.leader_violations, report.flat);
    ++report.leader_checks;
  }
  return report;
}

}  // namespace apm
