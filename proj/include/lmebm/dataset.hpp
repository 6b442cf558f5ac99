#pragma once

#include <cstdint>
#include <vector>

#include "lmebm/machine.hpp"

namespace lmebm {

// Observed binary vectors of a fixed width with empirical weights.
// Rows are stored as bit masks (bit k = component k). Weights default to the
// uniform empirical distribution 1/T.
class Dataset {
 public:
  Dataset(int width, std::vector<std::uint32_t> rows,
          std::vector<double> weights = {});

  static Dataset from_rows(int width,
                           const std::vector<std::vector<int>>& rows);

  int width() const { return width_; }
  std::size_t size() const { return rows_.size(); }

  std::uint32_t row(std::size_t t) const { return rows_[t]; }
  double weight(std::size_t t) const { return weights_[t]; }
  const std::vector<std::uint32_t>& rows() const { return rows_; }

  std::vector<int> row_bits(std::size_t t) const;

  // Distinct observed vectors with accumulated weights, sorted by mask.
  const std::vector<std::pair<std::uint32_t, double>>& empirical() const {
    return empirical_;
  }

  // Fraction of rows with component k set.
  double component_mean(int k) const;

 private:
  int width_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> weights_;
  std::vector<std::pair<std::uint32_t, double>> empirical_;
};

}  // namespace lmebm
