#pragma once

#include <cstdint>
#include <random>

namespace lmebm {

// splitmix64 finalizer; used to derive decorrelated child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Hierarchical seed derivation: master -> scenario -> size -> trial -> ...
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x517cc1b727220a95ull));
}

// Canonical double in [0, 1); avoids std::uniform_real_distribution so that
// seeded runs are reproducible independent of the standard library.
inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(gen);
}

}  // namespace lmebm
