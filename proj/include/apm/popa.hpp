#pragma once

#include <cstdint>

namespace apm {

/// Point counts of a generated avatar plus the alphabet of the random
/// pseudonym part. Totals are inputs; nothing here touches meshes.
struct AvatarAttributeProfile {
  std::uint64_t s_attr = 0;   ///< attribute-related 3D shape points
  std::uint64_t s_total = 0;  ///< all 3D shape points
  std::uint64_t t_attr = 0;   ///< attribute-related texture points
  std::uint64_t t_total = 0;  ///< all texture points
  std::uint32_t r_n = 9;      ///< random-digit alphabet size
  std::uint32_t r_l = 4;      ///< number of random digits
};

inline constexpr std::uint64_t kDefaultShapeTotal = 500000;
inline constexpr std::uint64_t kDefaultTextureTotal = 262144;

/// Probability that two uniformly drawn random parts coincide, r_n^-r_l.
double collision_probability(std::uint32_t r_n, std::uint32_t r_l);

/// PoPA in bits: -log2(s_attr/s_total + t_attr/t_total + r_n^-r_l).
/// Negative when the argument exceeds one.
double compute_popa(const AvatarAttributeProfile& profile);

struct PrivacyGainParams {
  double lambda = 1.5;        ///< pseudonym change frequency
  double a = 1.0 / 160.0;     ///< 1 / max avatars at the hotspot
  double b = 1.0 / 10.0;      ///< 1 / min avatars at the hotspot
};

/// Average privacy gain per collective pseudonym change, in bits.
double privacy_gain(const PrivacyGainParams& params);

}  // namespace apm
