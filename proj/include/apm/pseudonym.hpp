#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apm/market.hpp"

namespace apm::pseudonym {

using Digest = std::array<std::uint8_t, 32>;
using Tag = std::array<std::uint8_t, 16>;

/// Commitment to the attribute feature vectors an LA extracts from an avatar.
struct AttributeFingerprint {
  FollowerId owner = 0;
  Digest digest{};
  double size = 0.0;  ///< abstract data size, one unit per element
};

struct Pseudonym {
  std::string attribute_part;  ///< hex of the fingerprint digest
  std::string random_part;     ///< r_l symbols from an alphabet of r_n
  Tag tag{};

  bool operator==(const Pseudonym&) const = default;
};

struct PseudonymSet {
  FollowerId owner = 0;
  std::uint64_t epoch = 0;
  std::vector<Pseudonym> pseudonyms;

  bool operator==(const PseudonymSet&) const = default;
};

/// Shape of the random part. Symbols are "1".."9" then "A".."Z".
struct RandomPartSpec {
  std::uint32_t r_n = 9;
  std::uint32_t r_l = 4;
};

inline constexpr std::string_view kAlphabet = "123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

void validate(const RandomPartSpec& spec);

/// Symmetric key shared by the CA and the LA.
class CaKey {
 public:
  explicit CaKey(std::vector<std::uint8_t> bytes);
  static CaKey from_hex(std::string_view hex);

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> reasons;

  explicit operator bool() const { return ok; }
};

/// Digest over: vector count, then per vector its length and the
/// little-endian IEEE-754 bytes of each element (all counts u64 LE).
AttributeFingerprint extract_attribute_fingerprint(FollowerId owner,
                                                   std::span<const std::vector<double>> attribute_vectors);

/// Keyed tag over (owner, attribute part, random part, epoch).
Tag compute_tag(const CaKey& key, FollowerId owner, std::string_view attribute_part, std::string_view random_part,
                std::uint64_t epoch);

PseudonymSet mint_pseudonym_set(const AttributeFingerprint& fingerprint, std::size_t count, std::uint64_t epoch,
                                const CaKey& key, std::uint64_t seed, const RandomPartSpec& spec = {});

VerifyResult verify_pseudonym_set(const PseudonymSet& set, const CaKey& key, const RandomPartSpec& spec = {});

/// Re-mints every set at `new_epoch`, preserving owners and sizes. Each
/// owner's seed comes from `derive_owner_seed(root_seed, owner)`.
std::vector<PseudonymSet> rotate_epoch(std::span<const PseudonymSet> sets, std::uint64_t new_epoch, const CaKey& key,
                                       std::uint64_t root_seed, const RandomPartSpec& spec = {});

/// First eight bytes (LE) of SHA-256(root_seed LE || owner LE).
std::uint64_t derive_owner_seed(std::uint64_t root_seed, FollowerId owner);

/// Binary layout, all integers little-endian:
///   "APSS" | u8 version=1 | u32 owner | u64 epoch | u32 count |
///   count x ( u16 len | attribute bytes | u16 len | random bytes | 16 tag bytes )
std::vector<std::uint8_t> serialize(const PseudonymSet& set);
/// Throws std::runtime_error on any structural problem, including trailing bytes.
PseudonymSet deserialize(std::span<const std::uint8_t> bytes);

/// Text form: a header line "set <owner> <epoch> <count>" followed by one
/// "<attribute_part> <random_part> <tag hex>" line per pseudonym.
std::string to_hex_text(const PseudonymSet& set);
PseudonymSet from_hex_text(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

struct PseudonymRequest {
  AttributeFingerprint fingerprint;
  std::size_t count = 0;
  std::uint64_t epoch = 0;
};

/// Mints sets on request. Identity auditing is out of scope and always passes.
class CentralAuthority {
 public:
  CentralAuthority(CaKey key, RandomPartSpec spec, std::uint64_t root_seed);

  PseudonymSet mint(const PseudonymRequest& request) const;
  std::vector<PseudonymSet> mint_batch(std::span<const PseudonymRequest> requests) const;

 private:
  CaKey key_;
  RandomPartSpec spec_;
  std::uint64_t root_seed_;
};

/// Extracts fingerprints, forwards requests and checks returned sets before
/// handing them to followers.
class LocalAuthority {
 public:
  LocalAuthority(CaKey key, RandomPartSpec spec);

  PseudonymRequest request(FollowerId owner, std::span<const std::vector<double>> attribute_vectors,
                           std::size_t count, std::uint64_t epoch) const;
  VerifyResult accept(const PseudonymSet& set) const;

 private:
  CaKey key_;
  RandomPartSpec spec_;
};

}  // namespace apm::pseudonym
