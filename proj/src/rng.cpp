#include "hyperfill/rng.hpp"

#include <algorithm>

namespace hyperfill {

std::vector<int> sample_without_replacement(Rng& rng, int population, int k) {
  if (k < 0 || k > population)
    throw std::invalid_argument("sample_without_replacement: k out of range");
  // Floyd's algorithm: k draws regardless of population size.
  std::vector<int> out;
  out.reserve(k);
  for (int j = population - k; j < population; ++j) {
    int t = uniform_index(rng, j + 1);
    if (std::find(out.begin(), out.end(), t) != out.end()) {
      out.push_back(j);
    } else {
      out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ordered_subset(Rng& rng, int size, int k) {
  if (k < 0 || k > size) throw std::invalid_argument("ordered_subset: k out of range");
  std::vector<int> out;
  out.reserve(k);
  int needed = k;
  for (int i = 0; i < size && needed > 0; ++i) {
    // Select element i with probability needed / (size - i).
    if (uniform_unit(rng) * (size - i) < needed) {
      out.push_back(i);
      --needed;
    }
  }
  return out;
}

}  // namespace hyperfill
