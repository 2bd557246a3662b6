#pragma once

#include <cstdint>
#include <random>

namespace pathsec {

/// splitmix64 step: cheap, well-mixed stream for deriving independent
/// sub-seeds from one master seed (window seeds, event seeds, ...).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive the i-th sub-seed of a master seed (stateless form).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace pathsec
