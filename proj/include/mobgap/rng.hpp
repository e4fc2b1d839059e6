#pragma once

#include <cstdint>

namespace mobgap {

/// Counter-based uniform variates: the value depends only on (seed, stream, index),
/// so a disorder realization does not depend on the order sites are visited.
namespace rng {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

/// Uniform on [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return static_cast<double>(mix(seed, stream, index) >> 11) * 0x1.0p-53;
}

/// Uniform on [-width/2, width/2).
constexpr double centered(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                          double width) {
  return width * (uniform01(seed, stream, index) - 0.5);
}

inline constexpr std::uint64_t kDisorderStream = 0x6469736f72646572ULL;
inline constexpr std::uint64_t kPerturbationStream = 0x7065727475726200ULL;
inline constexpr std::uint64_t kEnsembleStream = 0x656e73656d626c65ULL;

}  // namespace rng
}  // namespace mobgap
