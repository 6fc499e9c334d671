#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace hyperfill {

using Rng = std::mt19937_64;

// SplitMix64 mix; used to derive independent per-stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

inline int uniform_index(Rng& rng, int size) {
  if (size <= 0) throw std::invalid_argument("uniform_index: empty range");
  return std::uniform_int_distribution<int>(0, size - 1)(rng);
}

inline double uniform_unit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

// Binomial draw as an explicit Bernoulli count: exact at p in {0,1} and not
// dependent on any library-specific binomial algorithm.
inline int count_bernoulli(Rng& rng, int n, double p) {
  int c = 0;
  for (int i = 0; i < n; ++i) {
    if (uniform_unit(rng) < p) ++c;
  }
  return c;
}

// k distinct values from [0, population), returned in increasing order.
std::vector<int> sample_without_replacement(Rng& rng, int population, int k);

// Uniformly random k-subset of [0, size), emitted in increasing order
// (selection sampling), so subsequences keep their original relative order.
std::vector<int> ordered_subset(Rng& rng, int size, int k);

}  // namespace hyperfill
