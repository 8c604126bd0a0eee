#include "apm/pseudonym.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "apm/error.hpp"

namespace apm::pseudonym {

namespace {

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
  void put_f64(double value) { put(std::bit_cast<std::uint64_t>(value)); }
  void put_bytes(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
  void put_string(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) throw std::length_error("field too long");
    put(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::span<const std::uint8_t> view() const { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint16_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void get_bytes(std::span<std::uint8_t> out) {
    need(out.size());
    std::memcpy(out.data(), in_.data() + pos_, out.size());
    pos_ += out.size();
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw std::runtime_error("pseudonym set: truncated input");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

constexpr std::array<std::uint8_t, 4> kMagic{'A', 'P', 'S', 'S'};
constexpr std::uint8_t kVersion = 1;

// Uniform index in [0, n) without modulo bias.
std::uint32_t uniform_index(std::mt19937_64& rng, std::uint32_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return static_cast<std::uint32_t>(draw % n);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_lower_hex(std::string_view s) {
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

void validate(const RandomPartSpec& spec) {
  if (spec.r_n < 2 || spec.r_n > kAlphabet.size()) {
    throw DomainError(fmt::format("r_n must be in [2, {}]", kAlphabet.size()));
  }
  if (spec.r_l < 1) throw DomainError("r_l must be at least 1");
}

CaKey::CaKey(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  if (bytes_.empty()) throw std::invalid_argument("CA key must not be empty");
}

CaKey CaKey::from_hex(std::string_view hex) { return CaKey(pseudonym::from_hex(hex)); }

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

AttributeFingerprint extract_attribute_fingerprint(FollowerId owner,
                                                   std::span<const std::vector<double>> attribute_vectors) {
  std::size_t elements = 0;
  for (const auto& v : attribute_vectors) elements += v.size();
  if (attribute_vectors.empty() || elements == 0) {
    throw std::invalid_argument("fingerprint needs at least one nonempty attribute vector");
  }
  ByteWriter w;
  w.put(static_cast<std::uint64_t>(attribute_vectors.size()));
  for (const auto& v : attribute_vectors) {
    w.put(static_cast<std::uint64_t>(v.size()));
    for (double x : v) w.put_f64(x);
  }
  return {owner, sha256(w.view()), static_cast<double>(elements)};
}

Tag compute_tag(const CaKey& key, FollowerId owner, std::string_view attribute_part, std::string_view random_part,
                std::uint64_t epoch) {
  ByteWriter w;
  w.put(owner);
  w.put_string(attribute_part);
  w.put_string(random_part);
  w.put(epoch);
  const auto message = w.view();

  std::array<std::uint8_t, EVP_MAX_MD_SIZE> mac{};
  unsigned int len = 0;
  const auto k = key.bytes();
  if (HMAC(EVP_sha256(), k.data(), static_cast<int>(k.size()), message.data(), message.size(), mac.data(), &len) ==
      nullptr) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }
  Tag tag{};
  std::memcpy(tag.data(), mac.data(), tag.size());
  return tag;
}

PseudonymSet mint_pseudonym_set(const AttributeFingerprint& fingerprint, std::size_t count, std::uint64_t epoch,
                                const CaKey& key, std::uint64_t seed, const RandomPartSpec& spec) {
  if (count < 1) throw std::invalid_argument("pseudonym set needs count >= 1");
  validate(spec);
  PseudonymSet set{fingerprint.owner, epoch, {}};
  set.pseudonyms.reserve(count);
  const std::string attribute_part = to_hex(fingerprint.digest);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::string random_part(spec.r_l, '\0');
    for (auto& symbol : random_part) symbol = kAlphabet[uniform_index(rng, spec.r_n)];
    const Tag tag = compute_tag(key, fingerprint.owner, attribute_part, random_part, epoch);
    set.pseudonyms.push_back({attribute_part, std::move(random_part), tag});
  }
  return set;
}

VerifyResult verify_pseudonym_set(const PseudonymSet& set, const CaKey& key, const RandomPartSpec& spec) {
  VerifyResult result;
  auto fail = [&](std::string reason) {
    result.ok = false;
    result.reasons.push_back(std::move(reason));
  };
  if (set.pseudonyms.empty()) {
    fail("empty set");
    return result;
  }
  const std::string_view allowed = kAlphabet.substr(0, std::min<std::size_t>(spec.r_n, kAlphabet.size()));
  const std::string& attribute_part = set.pseudonyms.front().attribute_part;
  for (std::size_t k = 0; k < set.pseudonyms.size(); ++k) {
    const auto& ps = set.pseudonyms[k];
    if (ps.attribute_part.size() != 2 * std::tuple_size_v<Digest> || !is_lower_hex(ps.attribute_part)) {
      fail(fmt::format("malformed attribute part at index {}", k));
    }
    if (ps.attribute_part != attribute_part) fail(fmt::format("attribute part differs at index {}", k));
    if (ps.random_part.size() != spec.r_l || ps.random_part.find_first_not_of(allowed) != std::string::npos) {
      fail(fmt::format("malformed random part at index {}", k));
    }
    const Tag expected = compute_tag(key, set.owner, ps.attribute_part, ps.random_part, set.epoch);
    if (CRYPTO_memcmp(expected.data(), ps.tag.data(), expected.size()) != 0) {
      fail(fmt::format("tag mismatch at index {}", k));
    }
  }
  return result;
}

std::uint64_t derive_owner_seed(std::uint64_t root_seed, FollowerId owner) {
  ByteWriter w;
  w.put(root_seed);
  w.put(owner);
  const Digest d = sha256(w.view());
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(d[i]) << (8 * i);
  return seed;
}

std::vector<PseudonymSet> rotate_epoch(std::span<const PseudonymSet> sets, std::uint64_t new_epoch, const CaKey& key,
                                       std::uint64_t root_seed, const RandomPartSpec& spec) {
  for (const auto& set : sets) {
    if (new_epoch <= set.epoch) {
      throw std::invalid_argument(fmt::format("epoch {} does not advance owner {} past {}", new_epoch, set.owner, set.epoch));
    }
    if (set.pseudonyms.empty()) throw std::invalid_argument("cannot rotate an empty set");
  }
  std::vector<PseudonymSet> out;
  out.reserve(sets.size());
  for (const auto& set : sets) {
    AttributeFingerprint fp{set.owner, {}, 0.0};
    const auto digest = from_hex(set.pseudonyms.front().attribute_part);
    if (digest.size() != fp.digest.size()) throw std::invalid_argument("attribute part is not a 32-byte digest");
    std::copy(digest.begin(), digest.end(), fp.digest.begin());
    const std::uint64_t seed = derive_owner_seed(root_seed ^ new_epoch, set.owner);
    out.push_back(mint_pseudonym_set(fp, set.pseudonyms.size(), new_epoch, key, seed, spec));
  }
  return out;
}

std::vector<std::uint8_t> serialize(const PseudonymSet& set) {
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put(kVersion);
  w.put(set.owner);
  w.put(set.epoch);
  w.put(static_cast<std::uint32_t>(set.pseudonyms.size()));
  for (const auto& ps : set.pseudonyms) {
    w.put_string(ps.attribute_part);
    w.put_string(ps.random_part);
    w.put_bytes(ps.tag);
  }
  return w.take();
}

PseudonymSet deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::array<std::uint8_t, 4> magic{};
  r.get_bytes(magic);
  if (magic != kMagic) throw std::runtime_error("pseudonym set: bad magic");
  if (r.get<std::uint8_t>() != kVersion) throw std::runtime_error("pseudonym set: unsupported version");
  PseudonymSet set;
  set.owner = r.get<std::uint32_t>();
  set.epoch = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    Pseudonym ps;
    ps.attribute_part = r.get_string();
    ps.random_part = r.get_string();
    r.get_bytes(ps.tag);
    set.pseudonyms.push_back(std::move(ps));
  }
  if (!r.done()) throw std::runtime_error("pseudonym set: trailing bytes");
  return set;
}

std::string to_hex_text(const PseudonymSet& set) {
  std::string out = fmt::format("set {} {} {}\n", set.owner, set.epoch, set.pseudonyms.size());
  for (const auto& ps : set.pseudonyms) {
    out += fmt::format("{} {} {}\n", ps.attribute_part, ps.random_part, to_hex(ps.tag));
  }
  return out;
}

PseudonymSet from_hex_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string keyword;
  PseudonymSet set;
  std::size_t count = 0;
  if (!(in >> keyword >> set.owner >> set.epoch >> count) || keyword != "set") {
    throw std::runtime_error("pseudonym set text: bad header");
  }
  for (std::size_t i = 0; i < count; ++i) {
    Pseudonym ps;
    std::string tag_hex;
    if (!(in >> ps.attribute_part >> ps.random_part >> tag_hex)) {
      throw std::runtime_error(fmt::format("pseudonym set text: missing line {}", i + 1));
    }
    const auto tag = from_hex(tag_hex);
    if (tag.size() != ps.tag.size()) throw std::runtime_error("pseudonym set text: tag must be 16 bytes");
    std::copy(tag.begin(), tag.end(), ps.tag.begin());
    set.pseudonyms.push_back(std::move(ps));
  }
  std::string extra;
  if (in >> extra) throw std::runtime_error("pseudonym set text: trailing content");
  return set;
}

CentralAuthority::CentralAuthority(CaKey key, RandomPartSpec spec, std::uint64_t root_seed)
    : key_(std::move(key)), spec_(spec), root_seed_(root_seed) {
  validate(spec_);
}

PseudonymSet CentralAuthority::mint(const PseudonymRequest& request) const {
  const std::uint64_t seed = derive_owner_seed(root_seed_ ^ request.epoch, request.fingerprint.owner);
  return mint_pseudonym_set(request.fingerprint, request.count, request.epoch, key_, seed, spec_);
}

std::vector<PseudonymSet> CentralAuthority::mint_batch(std::span<const PseudonymRequest> requests) const {
  std::vector<PseudonymSet> out;
  out.reserve(requests.size());
  for (const auto& request : requests) out.push_back(mint(request));
  return out;
}

LocalAuthority::LocalAuthority(CaKey key, RandomPartSpec spec) : key_(std::move(key)), spec_(spec) {
  validate(spec_);
}

PseudonymRequest LocalAuthority::request(FollowerId owner, std::span<const std::vector<double>> attribute_vectors,
                                         std::size_t count, std::uint64_t epoch) const {
  return {extract_attribute_fingerprint(owner, attribute_vectors), count, epoch};
}

VerifyResult LocalAuthority::accept(const PseudonymSet& set) const { return verify_pseudonym_set(set, key_, spec_); }

}  // namespace apm::pseudonym
