#pragma once

#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>

namespace qctrl {

/// splitmix64 mixing step; used to derive independent seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic per-task stream: mixes the master seed with a list of
/// stream ids (restart index, episode, agent, ...) so parallel workers
/// draw from disjoint, order-independent sequences.
inline std::mt19937_64 derive_stream(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> ids) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  for (std::uint64_t id : ids) {
    state ^= id + 0x9e3779b97f4a7c15ull + (state << 6) + (state >> 2);
    mixed ^= splitmix64(state);
  }
  return std::mt19937_64(mixed);
}

/// Bit-mix two doubles into a stream id (used to key sweep grid points by
/// their parameter values rather than their position in the grid).
inline std::uint64_t hash_params(double a, double b) {
  std::uint64_t ua, ub;
  static_assert(sizeof(ua) == sizeof(a));
  std::memcpy(&ua, &a, sizeof(a));
  std::memcpy(&ub, &b, sizeof(b));
  std::uint64_t state = ua ^ (ub * 0x9e3779b97f4a7c15ull);
  return splitmix64(state);
}

}  // namespace qctrl
