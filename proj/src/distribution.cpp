#include "lmebm/distribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmebm/rng.hpp"

namespace lmebm {

namespace {

double log_sum_exp(const std::vector<double>& values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

}  // namespace

ExactDistribution::ExactDistribution(MachineSpec spec, WeightMatrix weights)
    : spec_(std::move(spec)), weights_(std::move(weights)) {
  if (weights_.node_count() != spec_.node_count()) {
    throw ShapeError("weight matrix size does not match the machine spec");
  }
  const std::uint32_t states = spec_.state_count();
  log_probs_.resize(states);

  // Energy 0.5 x' W x = sum over active pairs; built incrementally by
  // stripping the lowest set bit, so each state costs O(popcount).
  log_probs_[0] = 0.0;
  for (std::uint32_t s = 1; s < states; ++s) {
    const int a = std::countr_zero(s);
    const std::uint32_t rest = s & (s - 1);
    double e = log_probs_[rest];
    for (std::uint32_t r = rest; r != 0; r &= r - 1) {
      e += weights_.entry(a, std::countr_zero(r));
    }
    log_probs_[s] = e;
  }

  log_partition_ = log_sum_exp(log_probs_);
  for (double& lp : log_probs_) lp -= log_partition_;
}

ExactDistribution enumerate_distribution(const MachineSpec& spec,
                                         const WeightMatrix& weights) {
  return ExactDistribution(spec, weights);
}

double ExactDistribution::prob(std::uint32_t state) const {
  return std::exp(log_probs_[state]);
}

std::uint32_t ExactDistribution::check_observed(
    const std::vector<int>& y) const {
  if (static_cast<int>(y.size()) != spec_.visible_count()) {
    throw ShapeError("observed vector has " + std::to_string(y.size()) +
                     " components, expected " +
                     std::to_string(spec_.visible_count()));
  }
  std::uint32_t mask = 0;
  for (int k = 0; k < spec_.visible_count(); ++k) {
    const int v = y[static_cast<size_t>(k)];
    if (v != 0 && v != 1) {
      throw ShapeError("observed vector has a non-binary component");
    }
    mask |= static_cast<std::uint32_t>(v) << k;
  }
  return mask;
}

double ExactDistribution::observed_log_marginal(std::uint32_t y_mask) const {
  if ((y_mask & ~spec_.observed_mask()) != 0u) {
    throw ShapeError("observed mask has bits outside the visible range");
  }
  const int j = spec_.visible_count();
  const std::uint32_t hidden_states = spec_.hidden_state_count();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::uint32_t z = 0; z < hidden_states; ++z) {
    hi = std::max(hi, log_probs_[y_mask | (z << j)]);
  }
  double sum = 0.0;
  for (std::uint32_t z = 0; z < hidden_states; ++z) {
    sum += std::exp(log_probs_[y_mask | (z << j)] - hi);
  }
  return hi + std::log(sum);
}

double ExactDistribution::observed_marginal(std::uint32_t y_mask) const {
  return std::exp(observed_log_marginal(y_mask));
}

double ExactDistribution::observed_marginal(const std::vector<int>& y) const {
  return observed_marginal(check_observed(y));
}

std::vector<double> ExactDistribution::observed_log_marginal_table() const {
  const std::uint32_t observed = spec_.observed_state_count();
  std::vector<double> table(observed);
  for (std::uint32_t y = 0; y < observed; ++y) {
    table[y] = observed_log_marginal(y);
  }
  return table;
}

std::vector<double> ExactDistribution::observed_marginal_table() const {
  std::vector<double> table = observed_log_marginal_table();
  for (double& v : table) v = std::exp(v);
  return table;
}

std::vector<double> ExactDistribution::hidden_conditional(
    std::uint32_t y_mask) const {
  const double log_marginal = observed_log_marginal(y_mask);
  const int j = spec_.visible_count();
  const std::uint32_t hidden_states = spec_.hidden_state_count();
  std::vector<double> table(hidden_states);
  for (std::uint32_t z = 0; z < hidden_states; ++z) {
    table[z] = std::exp(log_probs_[y_mask | (z << j)] - log_marginal);
  }
  return table;
}

std::vector<double> ExactDistribution::hidden_conditional(
    const std::vector<int>& y) const {
  return hidden_conditional(check_observed(y));
}

double ExactDistribution::entropy() const {
  double h = 0.0;
  for (double lp : log_probs_) {
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
  }
  return h;
}

double ExactDistribution::log_likelihood(const Dataset& data) const {
  if (data.width() != spec_.visible_count()) {
    throw ShapeError("dataset width " + std::to_string(data.width()) +
                     " does not match visible count " +
                     std::to_string(spec_.visible_count()));
  }
  double ll = 0.0;
  for (const auto& [y, w] : data.empirical()) {
    ll += w * observed_log_marginal(y);
  }
  return ll;
}

double ExactDistribution::feature_expectation(int feature) const {
  const auto [a, b] = spec_.feature_pair(feature);
  const std::uint32_t pair_mask =
      (1u << a) | (1u << static_cast<std::uint32_t>(b));
  double e = 0.0;
  const std::uint32_t states = spec_.state_count();
  for (std::uint32_t s = 0; s < states; ++s) {
    if ((s & pair_mask) == pair_mask) e += std::exp(log_probs_[s]);
  }
  return e;
}

std::vector<double> ExactDistribution::feature_expectations() const {
  std::vector<double> e(static_cast<size_t>(spec_.feature_count()), 0.0);
  const std::uint32_t states = spec_.state_count();
  for (std::uint32_t s = 0; s < states; ++s) {
    if (std::popcount(s) < 2) continue;
    const double p = std::exp(log_probs_[s]);
    if (p == 0.0) continue;
    for (std::uint32_t u = s; u != 0; u &= u - 1) {
      const int a = std::countr_zero(u);
      for (std::uint32_t v = u & (u - 1); v != 0; v &= v - 1) {
        e[static_cast<size_t>(spec_.feature_index(a, std::countr_zero(v)))] +=
            p;
      }
    }
  }
  return e;
}

Dataset ExactDistribution::sample_observed(std::size_t count,
                                           std::uint64_t seed) const {
  if (count < 1) {
    throw ShapeError("sample count must be at least 1");
  }
  const std::vector<double> marginal = observed_marginal_table();
  std::vector<double> cdf(marginal.size());
  double acc = 0.0;
  for (std::size_t y = 0; y < marginal.size(); ++y) {
    acc += marginal[y];
    cdf[y] = acc;
  }
  cdf.back() = 1.0;

  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> rows(count);
  for (std::size_t t = 0; t < count; ++t) {
    const double u = uniform_unit(gen);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    rows[t] = static_cast<std::uint32_t>(it - cdf.begin());
  }
  return Dataset(spec_.visible_count(), std::move(rows));
}

}  // namespace lmebm
