#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lmebm {

// Exact enumeration walks all 2^M joint states; the cap keeps that honest.
inline constexpr int kDefaultEnumerationCap = 20;

// Bound on |weight|. exp(+-30) spans far past double-precision relevance for
// these distributions; saturating here avoids infinities when a constraint
// target sits at 0 or 1.
inline constexpr double kWeightClamp = 30.0;

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class FeatureKind { VisibleVisible, VisibleHidden, HiddenHidden };

// Architecture of a Boltzmann machine with binary nodes. Visible nodes occupy
// bit positions 0..J-1 of a state word, hidden nodes the bits above. Pairwise
// features are indexed row-major over the strict upper triangle of the weight
// matrix, so feature i <-> node pair (a, b) with a < b.
class MachineSpec {
 public:
  MachineSpec(int visible_count, int hidden_count,
              int enumeration_cap = kDefaultEnumerationCap);

  int visible_count() const { return visible_; }
  int hidden_count() const { return hidden_; }
  int node_count() const { return visible_ + hidden_; }
  int feature_count() const { return static_cast<int>(pairs_.size()); }

  std::uint32_t state_count() const { return 1u << node_count(); }
  std::uint32_t observed_state_count() const { return 1u << visible_; }
  std::uint32_t hidden_state_count() const { return 1u << hidden_; }

  std::pair<int, int> feature_pair(int index) const;
  int feature_index(int a, int b) const;
  FeatureKind feature_kind(int index) const;

  // Mask with the visible bits set.
  std::uint32_t observed_mask() const { return (1u << visible_) - 1u; }

  bool operator==(const MachineSpec& other) const {
    return visible_ == other.visible_ && hidden_ == other.hidden_;
  }

 private:
  int visible_;
  int hidden_;
  std::vector<std::pair<int, int>> pairs_;       // feature index -> (a, b)
  std::vector<int> pair_index_;                  // a * M + b -> feature index
};

// Symmetric, zero-diagonal weight matrix stored as its strict upper triangle.
class WeightMatrix {
 public:
  explicit WeightMatrix(int node_count);

  int node_count() const { return node_count_; }
  int value_count() const { return static_cast<int>(values_.size()); }

  // Entry (a, b) of the full symmetric matrix; zero on the diagonal.
  double entry(int a, int b) const;
  void set_entry(int a, int b, double value);

  // Access by canonical feature index (upper-triangle row-major order).
  double value(int index) const { return values_[static_cast<size_t>(index)]; }
  void set_value(int index, double v);

  const std::vector<double>& values() const { return values_; }

  double max_abs() const;
  bool operator==(const WeightMatrix& other) const {
    return node_count_ == other.node_count_ && values_ == other.values_;
  }

 private:
  int node_count_;
  std::vector<double> values_;
};

// Throws unless all entries are finite and within the clamp.
void validate_weights(const WeightMatrix& weights, double clamp = kWeightClamp);

}  // namespace lmebm
