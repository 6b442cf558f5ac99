#include "lmebm/machine.hpp"

#include <cmath>
#include <cstdlib>

namespace lmebm {

MachineSpec::MachineSpec(int visible_count, int hidden_count,
                         int enumeration_cap)
    : visible_(visible_count), hidden_(hidden_count) {
  if (visible_count < 1) {
    throw ShapeError("visible_count must be at least 1");
  }
  if (hidden_count < 0) {
    throw ShapeError("hidden_count must be non-negative");
  }
  const int m = visible_count + hidden_count;
  if (m > enumeration_cap) {
    throw CapacityError("machine has " + std::to_string(m) +
                        " nodes, above the enumeration cap of " +
                        std::to_string(enumeration_cap));
  }
  pairs_.reserve(static_cast<size_t>(m) * (m - 1) / 2);
  pair_index_.assign(static_cast<size_t>(m) * m, -1);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      pair_index_[static_cast<size_t>(a) * m + b] =
          static_cast<int>(pairs_.size());
      pairs_.emplace_back(a, b);
    }
  }
}

std::pair<int, int> MachineSpec::feature_pair(int index) const {
  if (index < 0 || index >= feature_count()) {
    throw ShapeError("feature index " + std::to_string(index) +
                     " out of range [0, " + std::to_string(feature_count()) +
                     ")");
  }
  return pairs_[static_cast<size_t>(index)];
}

int MachineSpec::feature_index(int a, int b) const {
  const int m = node_count();
  if (a == b || a < 0 || b < 0 || a >= m || b >= m) {
    throw ShapeError("invalid node pair (" + std::to_string(a) + ", " +
                     std::to_string(b) + ")");
  }
  if (a > b) std::swap(a, b);
  return pair_index_[static_cast<size_t>(a) * m + b];
}

FeatureKind MachineSpec::feature_kind(int index) const {
  const auto [a, b] = feature_pair(index);
  if (b < visible_) return FeatureKind::VisibleVisible;
  if (a < visible_) return FeatureKind::VisibleHidden;
  return FeatureKind::HiddenHidden;
}

WeightMatrix::WeightMatrix(int node_count) : node_count_(node_count) {
  if (node_count < 1) {
    throw ShapeError("node_count must be at least 1");
  }
  values_.assign(static_cast<size_t>(node_count) * (node_count - 1) / 2, 0.0);
}

namespace {

int triangle_index(int node_count, int a, int b) {
  if (a > b) std::swap(a, b);
  // row-major strict upper triangle
  return a * (2 * node_count - a - 1) / 2 + (b - a - 1);
}

}  // namespace

double WeightMatrix::entry(int a, int b) const {
  if (a < 0 || b < 0 || a >= node_count_ || b >= node_count_) {
    throw ShapeError("weight index out of range");
  }
  if (a == b) return 0.0;
  return values_[static_cast<size_t>(triangle_index(node_count_, a, b))];
}

void WeightMatrix::set_entry(int a, int b, double value) {
  if (a < 0 || b < 0 || a >= node_count_ || b >= node_count_) {
    throw ShapeError("weight index out of range");
  }
  if (a == b) {
    throw ShapeError("diagonal weights are fixed at zero");
  }
  if (!std::isfinite(value)) {
    throw ShapeError("weights must be finite");
  }
  values_[static_cast<size_t>(triangle_index(node_count_, a, b))] = value;
}

void WeightMatrix::set_value(int index, double v) {
  if (!std::isfinite(v)) {
    throw ShapeError("weights must be finite");
  }
  values_[static_cast<size_t>(index)] = v;
}

double WeightMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void validate_weights(const WeightMatrix& weights, double clamp) {
  for (double v : weights.values()) {
    if (!std::isfinite(v)) {
      throw ShapeError("weights must be finite");
    }
    if (std::abs(v) > clamp + 1e-12) {
      throw ShapeError("weight magnitude " + std::to_string(std::abs(v)) +
                       " exceeds the clamp of " + std::to_string(clamp));
    }
  }
}

}  // namespace lmebm
