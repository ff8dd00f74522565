#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace lakesketch {

enum class HashKind {
  SplitMix,
  Fnv1a,
  MurmurLike,
  ShaFold,
  XorMult,
};

inline constexpr std::array<HashKind, 5> kAllHashKinds = {
    HashKind::SplitMix, HashKind::Fnv1a, HashKind::MurmurLike, HashKind::ShaFold,
    HashKind::XorMult};

std::string_view to_string(HashKind kind);
HashKind hash_kind_from_string(std::string_view name);

/// A seeded 64-bit hash over byte strings. Values depend only on
/// (kind, seed, bytes), never on the platform.
struct HashFamily {
  HashKind kind = HashKind::MurmurLike;
  std::uint64_t seed = 1;

  std::uint64_t operator()(std::string_view bytes) const;

  friend bool operator==(const HashFamily&, const HashFamily&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// MurmurHash3 64-bit finalizer.
std::uint64_t fmix64(std::uint64_t x);

}  // namespace lakesketch
