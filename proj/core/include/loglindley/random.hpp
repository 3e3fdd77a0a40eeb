#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace loglindley {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic stream keyed by a seed and a path of indices, e.g.
/// (seed, config, replicate). Streams for distinct keys are independent for
/// practical purposes, and the result never depends on evaluation order.
inline Rng derive_stream(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : path) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(mix64(h)),
                    static_cast<std::uint32_t>(mix64(h) >> 32)};
  return Rng(seq);
}

/// Uniform variate on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace loglindley
