#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "apm/pseudonym.hpp"

using namespace apm;
using namespace apm::pseudonym;

namespace {

const CaKey& key() {
  static const CaKey k = CaKey::from_hex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f");
  return k;
}

AttributeFingerprint fingerprint(FollowerId owner, double bias = 0.0) {
  const std::vector<std::vector<double>> vectors{{0.1 + bias, 0.2, 0.3}, {static_cast<double>(owner)}};
  return extract_attribute_fingerprint(owner, vectors);
}

bool accepted(std::span<const std::uint8_t> bytes) {
  try {
    return static_cast<bool>(verify_pseudonym_set(deserialize(bytes), key()));
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

TEST_CASE("fingerprints") {
  const std::vector<std::vector<double>> a{{1.0, 2.0}, {3.0}};
  auto b = a;
  CHECK(extract_attribute_fingerprint(1, a).digest == extract_attribute_fingerprint(1, b).digest);
  CHECK(extract_attribute_fingerprint(1, a).size == 3.0);
  b[0][0] += 1e-15;
  CHECK(extract_attribute_fingerprint(1, a).digest != extract_attribute_fingerprint(1, b).digest);
  // Vector boundaries are part of the encoding.
  const std::vector<std::vector<double>> merged{{1.0, 2.0, 3.0}};
  CHECK(extract_attribute_fingerprint(1, a).digest != extract_attribute_fingerprint(1, merged).digest);
  CHECK_THROWS(extract_attribute_fingerprint(1, std::vector<std::vector<double>>{}));
  CHECK_THROWS(extract_attribute_fingerprint(1, std::vector<std::vector<double>>{{}}));
}

TEST_CASE("known answer") {
  // [[1.0]] encodes as u64 1, u64 1, f64 1.0, little endian.
  const std::vector<std::vector<double>> one{{1.0}};
  CHECK(to_hex(extract_attribute_fingerprint(0, one).digest) ==
        "7b7c534f75278483fc012dbb043b0f033e3e2a04c9e970020d17336ea0f2ef4d");
  CHECK(to_hex(compute_tag(key(), 4, "abc", "1234", 7)) == "2dbe81253af7025c5a654f23dc2129d1");
}

TEST_CASE("mint contract") {
  const auto fp = fingerprint(4);
  const auto set = mint_pseudonym_set(fp, 3, 0, key(), 99);
  REQUIRE(set.pseudonyms.size() == 3);
  CHECK(set.owner == 4);
  for (const auto& ps : set.pseudonyms) {
    CHECK(ps.attribute_part == to_hex(fp.digest));
    CHECK(ps.random_part.size() == 4);
    CHECK(ps.random_part.find_first_not_of("123456789") == std::string::npos);
  }
  CHECK(verify_pseudonym_set(set, key()));
  CHECK(mint_pseudonym_set(fp, 3, 0, key(), 99) == set);
  CHECK(serialize(mint_pseudonym_set(fp, 3, 0, key(), 99)) == serialize(set));
  CHECK_THROWS(mint_pseudonym_set(fp, 0, 0, key(), 99));
  CHECK_THROWS(mint_pseudonym_set(fp, 1, 0, key(), 99, {1, 4}));
}

TEST_CASE("round trip over random inputs") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> count(1, 20);
  std::uniform_int_distribution<std::uint64_t> epoch(0, 1000);
  std::uniform_int_distribution<std::uint32_t> rn(2, 35), rl(1, 8);
  for (int i = 0; i < 300; ++i) {
    const RandomPartSpec spec{rn(rng), rl(rng)};
    const auto set = mint_pseudonym_set(fingerprint(static_cast<FollowerId>(i)), count(rng), epoch(rng), key(), rng(),
                                        spec);
    CHECK(verify_pseudonym_set(set, key(), spec));
    CHECK(deserialize(serialize(set)) == set);
    CHECK(from_hex_text(to_hex_text(set)) == set);
  }
}

TEST_CASE("tampering is detected") {
  const auto set = mint_pseudonym_set(fingerprint(2), 3, 5, key(), 7);

  auto flipped = set;
  flipped.pseudonyms[1].random_part[0] = flipped.pseudonyms[1].random_part[0] == '1' ? '2' : '1';
  auto result = verify_pseudonym_set(flipped, key());
  CHECK_FALSE(result);
  REQUIRE(result.reasons.size() == 1);
  CHECK(result.reasons[0] == "tag mismatch at index 1");

  auto later = set;
  later.epoch += 1;
  CHECK_FALSE(verify_pseudonym_set(later, key()));

  auto moved = set;
  moved.owner = 3;
  CHECK_FALSE(verify_pseudonym_set(moved, key()));

  CHECK_FALSE(verify_pseudonym_set(set, CaKey::from_hex("ff")));
  CHECK_FALSE(verify_pseudonym_set(PseudonymSet{}, key()));
}

TEST_CASE("every single-byte mutation is rejected") {
  const auto bytes = serialize(mint_pseudonym_set(fingerprint(9), 2, 1, key(), 3));
  REQUIRE(accepted(bytes));
  std::size_t rejected = 0, total = 0;
  for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
    for (int delta = 1; delta < 256; ++delta) {
      auto copy = bytes;
      copy[pos] = static_cast<std::uint8_t>(copy[pos] + delta);
      ++total;
      if (!accepted(copy)) ++rejected;
    }
  }
  CHECK(rejected == total);
}

TEST_CASE("malformed encodings") {
  const auto bytes = serialize(mint_pseudonym_set(fingerprint(1), 1, 0, key(), 1));
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS(deserialize(truncated));
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS(deserialize(trailing));
  CHECK_THROWS(from_hex_text("set 1 0 2\n"));
  CHECK_THROWS(from_hex_text("bogus"));
  CHECK_THROWS(from_hex("abc"));
  CHECK_THROWS(from_hex("zz"));
}

TEST_CASE("distinct owners get distinct attribute parts") {
  std::map<std::string, FollowerId> seen;
  for (FollowerId owner = 0; owner < 500; ++owner) {
    const auto set = mint_pseudonym_set(fingerprint(owner, owner * 1e-3), 1, 0, key(), owner);
    CHECK(seen.emplace(set.pseudonyms[0].attribute_part, owner).second);
  }
}

TEST_CASE("random part collision rate") {
  constexpr std::size_t n = 100000;
  const auto set = mint_pseudonym_set(fingerprint(0), n, 0, key(), 2024);
  std::map<std::string, std::size_t> counts;
  for (const auto& ps : set.pseudonyms) ++counts[ps.random_part];
  double pairs = 0.0;
  for (const auto& [part, k] : counts) pairs += 0.5 * static_cast<double>(k) * static_cast<double>(k - 1);
  const double p = 1.0 / 6561.0;
  const double trials = 0.5 * n * (n - 1.0);
  // Pair indicators are pairwise independent under uniform draws.
  const double sigma = std::sqrt(trials * p * (1 - p));
  CHECK(std::abs(pairs - trials * p) <= 3.0 * sigma);
}

TEST_CASE("epoch rotation") {
  std::vector<PseudonymSet> sets;
  const std::vector<std::size_t> sizes{2, 1, 3, 1, 2, 1};
  for (FollowerId owner = 0; owner < sizes.size(); ++owner) {
    sets.push_back(mint_pseudonym_set(fingerprint(owner), sizes[owner], 0, key(), derive_owner_seed(5, owner)));
  }
  const auto rotated = rotate_epoch(sets, 1, key(), 5);
  REQUIRE(rotated.size() == 6);
  for (std::size_t i = 0; i < rotated.size(); ++i) {
    CHECK(rotated[i].epoch == 1);
    CHECK(rotated[i].owner == sets[i].owner);
    CHECK(rotated[i].pseudonyms.size() == sizes[i]);
    CHECK(rotated[i].pseudonyms[0].attribute_part == sets[i].pseudonyms[0].attribute_part);
    CHECK(verify_pseudonym_set(rotated[i], key()));
    // Old sets do not verify in the new epoch context.
    auto stale = sets[i];
    stale.epoch = 1;
    CHECK_FALSE(verify_pseudonym_set(stale, key()));
  }
  CHECK_THROWS(rotate_epoch(rotated, 1, key(), 5));
  CHECK(rotate_epoch(sets, 1, key(), 5) == rotated);
}

TEST_CASE("owner seeds") {
  CHECK(derive_owner_seed(1, 0) == derive_owner_seed(1, 0));
  CHECK(derive_owner_seed(1, 0) != derive_owner_seed(1, 1));
  CHECK(derive_owner_seed(1, 0) != derive_owner_seed(2, 0));
}

TEST_CASE("authority roles") {
  const LocalAuthority la(key(), {});
  const CentralAuthority ca(key(), {}, 77);
  std::vector<PseudonymRequest> requests;
  for (FollowerId owner = 0; owner < 4; ++owner) {
    const std::vector<std::vector<double>> vectors{{0.5 * owner, 1.0}};
    requests.push_back(la.request(owner, vectors, owner + 1, 0));
  }
  const auto sets = ca.mint_batch(requests);
  REQUIRE(sets.size() == 4);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(la.accept(sets[i]));
    CHECK(sets[i].pseudonyms.size() == i + 1);
    CHECK(sets[i] == ca.mint(requests[i]));
  }
  const LocalAuthority other(CaKey::from_hex("abcd"), {});
  CHECK_FALSE(other.accept(sets[0]));
}
