#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spinecho {

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Every random stream in the project is keyed by (global seed, task label).
// Adding a new task label never perturbs the streams of existing tasks.
constexpr std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label) {
  return splitmix64(global_seed ^ fnv1a64(label));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

}  // namespace spinecho
