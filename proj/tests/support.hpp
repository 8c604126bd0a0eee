#pragma once

#include <cstddef>
#include <vector>

#include "apm/market.hpp"
#include "apm/popa.hpp"

namespace apm::test {

// Default follower: alpha 15, PoPA 1.5, gain at lambda 1.5.
inline SmuParams default_smu(FollowerId id = 0) {
  SmuParams s;
  s.id = id;
  s.gain = privacy_gain({});
  return s;
}

inline std::vector<Follower> default_population(std::size_t n = 6) {
  std::vector<Follower> pop;
  for (std::size_t i = 0; i < n; ++i) pop.push_back({default_smu(static_cast<FollowerId>(i)), {}});
  return pop;
}

// Reference values computed independently in double precision.
inline constexpr double kGain = 2.2987738814657956;
inline constexpr double kDerivedPrice = 8.304409457870792;
inline constexpr double kDerivedDemand = 0.7187330351438832;
inline constexpr double kDerivedTotal = 4.312398210863299;
inline constexpr double kDerivedUtility = 7.124964717040883;
inline constexpr double kPaperPrice = 13.130424254757905;
inline constexpr double kThreshold = 13.792643288794773;

}  // namespace apm::test
