#include "lmebm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace lmebm {

Dataset::Dataset(int width, std::vector<std::uint32_t> rows,
                 std::vector<double> weights)
    : width_(width), rows_(std::move(rows)), weights_(std::move(weights)) {
  if (width_ < 1 || width_ > 31) {
    throw ShapeError("dataset width must be in [1, 31]");
  }
  if (rows_.empty()) {
    throw ShapeError("dataset must contain at least one observation");
  }
  const std::uint32_t mask = (1u << width_) - 1u;
  for (std::uint32_t r : rows_) {
    if ((r & ~mask) != 0u) {
      throw ShapeError("observation has bits outside the declared width");
    }
  }
  if (weights_.empty()) {
    weights_.assign(rows_.size(), 1.0 / static_cast<double>(rows_.size()));
  } else {
    if (weights_.size() != rows_.size()) {
      throw ShapeError("weight count does not match observation count");
    }
    // compensated sum so the unit-total check is meaningful at 1e-12
    double sum = 0.0, comp = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) {
        throw ShapeError("empirical weights must be non-negative");
      }
      const double t = sum + w;
      comp += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
      sum = t;
    }
    if (std::abs(sum + comp - 1.0) > 1e-12) {
      throw ShapeError("empirical weights must sum to 1");
    }
  }
  std::map<std::uint32_t, double> grouped;
  for (std::size_t t = 0; t < rows_.size(); ++t) {
    grouped[rows_[t]] += weights_[t];
  }
  empirical_.assign(grouped.begin(), grouped.end());
}

Dataset Dataset::from_rows(int width,
                           const std::vector<std::vector<int>>& rows) {
  std::vector<std::uint32_t> masks;
  masks.reserve(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (static_cast<int>(rows[t].size()) != width) {
      throw ShapeError("observation " + std::to_string(t) + " has " +
                       std::to_string(rows[t].size()) + " components, expected " +
                       std::to_string(width));
    }
    std::uint32_t mask = 0;
    for (int k = 0; k < width; ++k) {
      const int v = rows[t][static_cast<size_t>(k)];
      if (v != 0 && v != 1) {
        throw ShapeError("observation " + std::to_string(t) +
                         " has a non-binary component");
      }
      mask |= static_cast<std::uint32_t>(v) << k;
    }
    masks.push_back(mask);
  }
  return Dataset(width, std::move(masks));
}

std::vector<int> Dataset::row_bits(std::size_t t) const {
  std::vector<int> bits(static_cast<size_t>(width_));
  for (int k = 0; k < width_; ++k) {
    bits[static_cast<size_t>(k)] = static_cast<int>((rows_[t] >> k) & 1u);
  }
  return bits;
}

double Dataset::component_mean(int k) const {
  if (k < 0 || k >= width_) {
    throw ShapeError("component index out of range");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < rows_.size(); ++t) {
    sum += static_cast<double>((rows_[t] >> k) & 1u) * weights_[t];
  }
  return sum;
}

}  // namespace lmebm
