#include "lakesketch/hashing.hpp"

#include <openssl/sha.h>

#include "lakesketch/errors.hpp"

namespace lakesketch {

std::string_view to_string(HashKind kind) {
  switch (kind) {
    case HashKind::SplitMix: return "splitmix";
    case HashKind::Fnv1a: return "fnv1a";
    case HashKind::MurmurLike: return "murmur-like";
    case HashKind::ShaFold: return "sha-fold";
    case HashKind::XorMult: return "xor-mult";
  }
  return "murmur-like";
}

HashKind hash_kind_from_string(std::string_view name) {
  for (auto kind : kAllHashKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown hash family: " + std::string(name));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

namespace {

// Little-endian load regardless of host byte order.
std::uint64_t load_le64(const unsigned char* p, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t hash_splitmix(std::string_view bytes, std::uint64_t seed) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint64_t h = splitmix64(seed ^ bytes.size());
  std::size_t i = 0;
  for (; i + 8 <= bytes.size(); i += 8) h = splitmix64(h ^ load_le64(p + i, 8));
  if (i < bytes.size()) h = splitmix64(h ^ load_le64(p + i, bytes.size() - i) ^ 0xFFULL << 56);
  return splitmix64(h);
}

std::uint64_t hash_fnv1a(std::string_view bytes, std::uint64_t seed) {
  constexpr std::uint64_t kPrime = 0x100000001B3ULL;
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xFF;
    h *= kPrime;
  }
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= kPrime;
  }
  return h;
}

// MurmurHash64A.
std::uint64_t hash_murmur(std::string_view bytes, std::uint64_t seed) {
  constexpr std::uint64_t m = 0xC6A4A7935BD1E995ULL;
  constexpr int r = 47;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t len = bytes.size();
  std::uint64_t h = seed ^ (len * m);
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    std::uint64_t k = load_le64(p + i, 8);
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
  }
  if (i < len) {
    h ^= load_le64(p + i, len - i);
    h *= m;
  }
  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

std::uint64_t hash_sha_fold(std::string_view bytes, std::uint64_t seed) {
  unsigned char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
  unsigned char digest[SHA256_DIGEST_LENGTH];
  std::string buffer(reinterpret_cast<const char*>(seed_bytes), 8);
  buffer.append(bytes);
  SHA256(reinterpret_cast<const unsigned char*>(buffer.data()), buffer.size(), digest);
  std::uint64_t folded = 0;
  for (int w = 0; w < 4; ++w) folded ^= load_le64(digest + 8 * w, 8);
  return folded;
}

std::uint64_t hash_xor_mult(std::string_view bytes, std::uint64_t seed) {
  constexpr std::uint64_t kMul = 0x2127599BF4325C37ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint64_t h = seed * kMul ^ bytes.size();
  std::size_t i = 0;
  auto mix = [](std::uint64_t x) {
    x ^= x >> 23;
    x *= kMul;
    x ^= x >> 47;
    return x;
  };
  for (; i + 8 <= bytes.size(); i += 8) {
    h ^= mix(load_le64(p + i, 8));
    h *= 0x880355F21E6D1965ULL;
  }
  if (i < bytes.size()) {
    h ^= mix(load_le64(p + i, bytes.size() - i));
    h *= 0x880355F21E6D1965ULL;
  }
  return mix(h);
}

}  // namespace

std::uint64_t HashFamily::operator()(std::string_view bytes) const {
  switch (kind) {
    case HashKind::SplitMix: return hash_splitmix(bytes, seed);
    case HashKind::Fnv1a: return hash_fnv1a(bytes, seed);
    case HashKind::MurmurLike: return hash_murmur(bytes, seed);
    case HashKind::ShaFold: return hash_sha_fold(bytes, seed);
    case HashKind::XorMult: return hash_xor_mult(bytes, seed);
  }
  return hash_murmur(bytes, seed);
}

}  // namespace lakesketch
