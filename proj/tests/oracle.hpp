#pragma once

// Brute-force reference implementations used only by tests. Everything here
// recomputes from first principles in long double with naive summation, on an
// independent code path from the library (explicit double loops over node
// pairs, no log-sum-exp, no incremental energies).

#include <cmath>
#include <cstdint>
#include <vector>

#include "lmebm/dataset.hpp"
#include "lmebm/machine.hpp"

namespace oracle {

using lmebm::Dataset;
using lmebm::MachineSpec;
using lmebm::WeightMatrix;

inline long double energy(const WeightMatrix& w, std::uint32_t state) {
  const int m = w.node_count();
  long double e = 0.0L;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if (((state >> a) & 1u) && ((state >> b) & 1u)) {
        e += static_cast<long double>(w.entry(a, b));
      }
    }
  }
  return e;
}

inline long double partition(const MachineSpec& spec, const WeightMatrix& w) {
  long double z = 0.0L;
  for (std::uint32_t s = 0; s < spec.state_count(); ++s) {
    z += std::exp(energy(w, s));
  }
  return z;
}

inline std::vector<long double> probabilities(const MachineSpec& spec,
                                              const WeightMatrix& w) {
  const long double z = partition(spec, w);
  std::vector<long double> p(spec.state_count());
  for (std::uint32_t s = 0; s < spec.state_count(); ++s) {
    p[s] = std::exp(energy(w, s)) / z;
  }
  return p;
}

inline long double observed_marginal(const MachineSpec& spec,
                                     const WeightMatrix& w,
                                     std::uint32_t y_mask) {
  const std::vector<long double> p = probabilities(spec, w);
  long double total = 0.0L;
  for (std::uint32_t z = 0; z < spec.hidden_state_count(); ++z) {
    total += p[y_mask | (z << spec.visible_count())];
  }
  return total;
}

inline std::vector<long double> hidden_conditional(const MachineSpec& spec,
                                                   const WeightMatrix& w,
                                                   std::uint32_t y_mask) {
  const std::vector<long double> p = probabilities(spec, w);
  long double marginal = 0.0L;
  std::vector<long double> cond(spec.hidden_state_count());
  for (std::uint32_t z = 0; z < spec.hidden_state_count(); ++z) {
    cond[z] = p[y_mask | (z << spec.visible_count())];
    marginal += cond[z];
  }
  for (long double& c : cond) c /= marginal;
  return cond;
}

inline long double entropy(const MachineSpec& spec, const WeightMatrix& w) {
  const std::vector<long double> p = probabilities(spec, w);
  long double h = 0.0L;
  for (long double v : p) {
    if (v > 0.0L) h -= v * std::log(v);
  }
  return h;
}

inline long double log_likelihood(const MachineSpec& spec,
                                  const WeightMatrix& w, const Dataset& data) {
  long double ll = 0.0L;
  for (std::size_t t = 0; t < data.size(); ++t) {
    ll += data.weight(t) *
          std::log(observed_marginal(spec, w, data.row(t)));
  }
  return ll;
}

inline long double feature_expectation(const MachineSpec& spec,
                                       const WeightMatrix& w, int feature) {
  const auto [a, b] = spec.feature_pair(feature);
  const std::vector<long double> p = probabilities(spec, w);
  long double e = 0.0L;
  for (std::uint32_t s = 0; s < spec.state_count(); ++s) {
    if (((s >> a) & 1u) && ((s >> b) & 1u)) e += p[s];
  }
  return e;
}

inline long double cross_entropy_observed(const MachineSpec& truth_spec,
                                          const WeightMatrix& truth,
                                          const MachineSpec& est_spec,
                                          const WeightMatrix& estimate) {
  long double d = 0.0L;
  for (std::uint32_t y = 0; y < truth_spec.observed_state_count(); ++y) {
    const long double pt = observed_marginal(truth_spec, truth, y);
    const long double pe = observed_marginal(est_spec, estimate, y);
    if (pt > 0.0L) d += pt * std::log(pt / pe);
  }
  return d;
}

// E-step targets by the defining double sum, one observation at a time.
inline std::vector<long double> constraint_targets(const MachineSpec& spec,
                                                   const WeightMatrix& w,
                                                   const Dataset& data) {
  const int j = spec.visible_count();
  std::vector<long double> eta(static_cast<size_t>(spec.feature_count()),
                               0.0L);
  for (std::size_t t = 0; t < data.size(); ++t) {
    const std::uint32_t y = data.row(t);
    const std::vector<long double> cond = hidden_conditional(spec, w, y);
    for (int i = 0; i < spec.feature_count(); ++i) {
      const auto [a, b] = spec.feature_pair(i);
      long double e = 0.0L;
      for (std::uint32_t z = 0; z < spec.hidden_state_count(); ++z) {
        const std::uint32_t x = y | (z << j);
        if (((x >> a) & 1u) && ((x >> b) & 1u)) e += cond[z];
      }
      eta[static_cast<size_t>(i)] += data.weight(t) * e;
    }
  }
  return eta;
}

// Left side of the scaling-root equation at a given step value.
inline long double scaling_lhs(const MachineSpec& spec, const WeightMatrix& w,
                               int feature, double step) {
  const auto [a, b] = spec.feature_pair(feature);
  const std::vector<long double> p = probabilities(spec, w);
  long double g = 0.0L;
  for (std::uint32_t s = 0; s < spec.state_count(); ++s) {
    if (!(((s >> a) & 1u) && ((s >> b) & 1u))) continue;
    int bits = 0;
    for (int k = 0; k < spec.node_count(); ++k) bits += (s >> k) & 1u;
    const long double pairs = static_cast<long double>(bits) * (bits - 1) / 2;
    g += p[s] * std::exp(static_cast<long double>(step) * pairs);
  }
  return g;
}

// Q by its defining double sum over the data and hidden completions.
inline long double q_value(const MachineSpec& spec, const WeightMatrix& w,
                           const WeightMatrix& snapshot, const Dataset& data) {
  const int j = spec.visible_count();
  const std::vector<long double> p_w = probabilities(spec, w);
  long double q = 0.0L;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const std::uint32_t y = data.row(t);
    const std::vector<long double> cond = hidden_conditional(spec, snapshot, y);
    for (std::uint32_t z = 0; z < spec.hidden_state_count(); ++z) {
      if (cond[z] > 0.0L) {
        q += data.weight(t) * cond[z] * std::log(p_w[y | (z << j)]);
      }
    }
  }
  return q;
}

inline long double h_value(const MachineSpec& spec, const WeightMatrix& w,
                           const WeightMatrix& snapshot, const Dataset& data) {
  const std::vector<long double> p_w = probabilities(spec, w);
  long double h = 0.0L;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const std::uint32_t y = data.row(t);
    const std::vector<long double> cond_snap =
        hidden_conditional(spec, snapshot, y);
    const std::vector<long double> cond_w = hidden_conditional(spec, w, y);
    for (std::uint32_t z = 0; z < spec.hidden_state_count(); ++z) {
      if (cond_snap[z] > 0.0L) {
        h -= data.weight(t) * cond_snap[z] * std::log(cond_w[z]);
      }
    }
  }
  return h;
}

}  // namespace oracle
