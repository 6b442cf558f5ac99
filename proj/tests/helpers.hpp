#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lmebm/dataset.hpp"
#include "lmebm/machine.hpp"
#include "lmebm/rng.hpp"
#include "lmebm/selection.hpp"

namespace testutil {

// Random dataset of binary rows, uniform weights.
inline lmebm::Dataset random_dataset(int width, std::size_t count,
                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> rows(count);
  const std::uint32_t mask = (1u << width) - 1u;
  for (std::uint32_t& r : rows) {
    r = static_cast<std::uint32_t>(gen()) & mask;
  }
  return lmebm::Dataset(width, std::move(rows));
}

// Weight matrix with the hidden block relabeled by a permutation of the
// hidden node indices (identity on visible nodes).
inline lmebm::WeightMatrix permute_hidden(const lmebm::MachineSpec& spec,
                                          const lmebm::WeightMatrix& w,
                                          const std::vector<int>& perm) {
  lmebm::WeightMatrix out(w.node_count());
  const int j = spec.visible_count();
  auto mapped = [&](int node) {
    return node < j ? node : j + perm[static_cast<size_t>(node - j)];
  };
  for (int i = 0; i < spec.feature_count(); ++i) {
    const auto [a, b] = spec.feature_pair(i);
    out.set_entry(mapped(a), mapped(b), w.value(i));
  }
  return out;
}

}  // namespace testutil
