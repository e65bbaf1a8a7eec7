#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mag {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent streams from a master seed.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream seed for a tuple of ids, e.g. (master, purpose, epoch, node).
inline std::uint64_t DeriveSeed(std::uint64_t master,
                                std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = MixSeed(master);
  for (std::uint64_t id : ids) h = MixSeed(h ^ MixSeed(id));
  return h;
}

inline Rng MakeRng(std::uint64_t master,
                   std::initializer_list<std::uint64_t> ids) {
  return Rng(DeriveSeed(master, ids));
}

// Stream purpose tags.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kBatches = 2;
inline constexpr std::uint64_t kSample = 3;
inline constexpr std::uint64_t kAugment = 4;
inline constexpr std::uint64_t kInject = 5;
inline constexpr std::uint64_t kScore = 6;
inline constexpr std::uint64_t kTrain = 7;
}  // namespace stream

}  // namespace mag
