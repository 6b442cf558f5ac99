#pragma once

#include <cstdint>
#include <vector>

#include "lmebm/dataset.hpp"
#include "lmebm/machine.hpp"

namespace lmebm {

// Exact joint distribution p(x) = exp(0.5 x' W x) / Z over {0,1}^M, obtained
// by full enumeration. All probabilities live in the log domain; linear
// probabilities are materialized on demand. Immutable after construction and
// safe to share across threads.
class ExactDistribution {
 public:
  ExactDistribution(MachineSpec spec, WeightMatrix weights);

  const MachineSpec& spec() const { return spec_; }
  const WeightMatrix& weights() const { return weights_; }

  double log_partition() const { return log_partition_; }
  double log_prob(std::uint32_t state) const {
    return log_probs_[state];
  }
  double prob(std::uint32_t state) const;

  // p(y) = sum_z p(y, z); y is a visible-bit mask.
  double observed_marginal(std::uint32_t y_mask) const;
  double observed_log_marginal(std::uint32_t y_mask) const;
  double observed_marginal(const std::vector<int>& y) const;

  // Table of p(y) over all 2^J observed states, and the log version.
  std::vector<double> observed_marginal_table() const;
  std::vector<double> observed_log_marginal_table() const;

  // p(z | y) over all 2^L hidden completions; sums to one.
  std::vector<double> hidden_conditional(std::uint32_t y_mask) const;
  std::vector<double> hidden_conditional(const std::vector<int>& y) const;

  // -sum_x p(x) ln p(x), in nats, with 0 ln 0 = 0.
  double entropy() const;

  // sum_y w(y) ln p(y) for the dataset's empirical weights, in nats.
  double log_likelihood(const Dataset& data) const;

  // E[x_a x_b] for the node pair of the given feature index.
  double feature_expectation(int feature) const;
  std::vector<double> feature_expectations() const;

  // Draw count i.i.d. observed vectors from p(y) by inverse CDF.
  Dataset sample_observed(std::size_t count, std::uint64_t seed) const;

 private:
  std::uint32_t check_observed(const std::vector<int>& y) const;

  MachineSpec spec_;
  WeightMatrix weights_;
  std::vector<double> log_probs_;
  double log_partition_;
};

ExactDistribution enumerate_distribution(const MachineSpec& spec,
                                         const WeightMatrix& weights);

}  // namespace lmebm
