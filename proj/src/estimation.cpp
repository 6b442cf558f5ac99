#include "lmebm/estimation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace lmebm {

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::IterationCap: return "iteration_cap";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

ConstraintTargets e_step(const ExactDistribution& snapshot_dist,
                         const Dataset& data) {
  const MachineSpec& spec = snapshot_dist.spec();
  if (data.width() != spec.visible_count()) {
    throw ShapeError("dataset width does not match the machine spec");
  }
  const int j = spec.visible_count();
  const int l = spec.hidden_count();
  const int n = spec.feature_count();
  ConstraintTargets targets;
  targets.values.assign(static_cast<size_t>(n), 0.0);

  // visible-visible: pure data moments
  for (const auto& [y, w] : data.empirical()) {
    for (int a = 0; a < j; ++a) {
      if (((y >> a) & 1u) == 0u) continue;
      for (int b = a + 1; b < j; ++b) {
        if ((y >> b) & 1u) {
          targets.values[static_cast<size_t>(spec.feature_index(a, b))] += w;
        }
      }
    }
  }
  if (l == 0) return targets;

  // mixed and hidden families: conditional hidden moments per observation
  std::vector<double> first(static_cast<size_t>(l));
  std::vector<double> second(static_cast<size_t>(l) * l);
  for (const auto& [y, w] : data.empirical()) {
    const std::vector<double> cond = snapshot_dist.hidden_conditional(y);
    std::fill(first.begin(), first.end(), 0.0);
    std::fill(second.begin(), second.end(), 0.0);
    for (std::uint32_t z = 0; z < cond.size(); ++z) {
      const double pz = cond[z];
      if (pz == 0.0) continue;
      for (std::uint32_t u = z; u != 0; u &= u - 1) {
        const int m = std::countr_zero(u);
        first[static_cast<size_t>(m)] += pz;
        for (std::uint32_t v = u & (u - 1); v != 0; v &= v - 1) {
          second[static_cast<size_t>(m) * l + std::countr_zero(v)] += pz;
        }
      }
    }
    for (int m = 0; m < l; ++m) {
      for (int a = 0; a < j; ++a) {
        if ((y >> a) & 1u) {
          targets.values[static_cast<size_t>(spec.feature_index(a, j + m))] +=
              w * first[static_cast<size_t>(m)];
        }
      }
      for (int p = m + 1; p < l; ++p) {
        targets.values[static_cast<size_t>(
            spec.feature_index(j + m, j + p))] +=
            w * second[static_cast<size_t>(m) * l + p];
      }
    }
  }
  return targets;
}

ConstraintTargets e_step(const MachineSpec& spec, const WeightMatrix& snapshot,
                         const Dataset& data) {
  return e_step(ExactDistribution(spec, snapshot), data);
}

namespace {

// Mass of each feature's support, grouped by the total active-pair count
// n(x) = C(popcount(x), 2). g_i(step) = sum_c mass[i][c] * exp(step * c).
struct FeatureMass {
  std::vector<int> counts;
  std::vector<double> log_mass;
};

std::vector<FeatureMass> feature_mass_tables(const ExactDistribution& dist) {
  const MachineSpec& spec = dist.spec();
  const int n = spec.feature_count();
  const int max_count = n;
  std::vector<std::vector<double>> dense(
      static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(max_count) + 1, 0.0));
  const std::uint32_t states = spec.state_count();
  for (std::uint32_t s = 0; s < states; ++s) {
    const int bits = std::popcount(s);
    if (bits < 2) continue;
    const double p = dist.prob(s);
    if (p == 0.0) continue;
    const int c = bits * (bits - 1) / 2;
    for (std::uint32_t u = s; u != 0; u &= u - 1) {
      const int a = std::countr_zero(u);
      for (std::uint32_t v = u & (u - 1); v != 0; v &= v - 1) {
        dense[static_cast<size_t>(spec.feature_index(a, std::countr_zero(v)))]
             [static_cast<size_t>(c)] += p;
      }
    }
  }
  std::vector<FeatureMass> tables(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int c = 1; c <= max_count; ++c) {
      const double mass = dense[static_cast<size_t>(i)][static_cast<size_t>(c)];
      if (mass > 0.0) {
        tables[static_cast<size_t>(i)].counts.push_back(c);
        tables[static_cast<size_t>(i)].log_mass.push_back(std::log(mass));
      }
    }
  }
  return tables;
}

// ln g(step) - ln target, strictly increasing and convex in step.
double log_residual(const FeatureMass& fm, double step, double log_target) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fm.counts.size(); ++k) {
    hi = std::max(hi, fm.log_mass[k] + step * fm.counts[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < fm.counts.size(); ++k) {
    sum += std::exp(fm.log_mass[k] + step * fm.counts[k] - hi);
  }
  return hi + std::log(sum) - log_target;
}

// d/dstep ln g(step): the mass-weighted mean active-pair count, always >= 1.
double log_residual_slope(const FeatureMass& fm, double step) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fm.counts.size(); ++k) {
    hi = std::max(hi, fm.log_mass[k] + step * fm.counts[k]);
  }
  double sum = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < fm.counts.size(); ++k) {
    const double w = std::exp(fm.log_mass[k] + step * fm.counts[k] - hi);
    sum += w;
    weighted += w * fm.counts[k];
  }
  return weighted / sum;
}

// Newton iteration guarded by a sign-change bracket (bisection fallback).
double solve_scaling_root(const FeatureMass& fm, double target,
                          const EmisConfig& cfg) {
  const double log_target = std::log(target);
  double lo = -cfg.bracket_half_width;
  double hi = cfg.bracket_half_width;
  double h_lo = log_residual(fm, lo, log_target);
  double h_hi = log_residual(fm, hi, log_target);
  double width = cfg.bracket_half_width;
  int expansions = 0;
  while (h_lo > 0.0 && expansions < cfg.max_expansions) {
    hi = lo;
    h_hi = h_lo;
    width *= cfg.bracket_expansion;
    lo -= width;
    h_lo = log_residual(fm, lo, log_target);
    ++expansions;
  }
  while (h_hi < 0.0 && expansions < cfg.max_expansions) {
    lo = hi;
    h_lo = h_hi;
    width *= cfg.bracket_expansion;
    hi += width;
    h_hi = log_residual(fm, hi, log_target);
    ++expansions;
  }
  if (!(h_lo <= 0.0) || !(h_hi >= 0.0)) {
    throw BracketError("scaling root not bracketed after " +
                           std::to_string(expansions) + " expansions",
                       lo, hi, std::exp(h_lo + log_target),
                       std::exp(h_hi + log_target));
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double h = log_residual(fm, x, log_target);
    if (std::abs(h) <= 1e-12) return x;
    if (h < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (cfg.use_newton) {
      next = x - h / log_residual_slope(fm, x);
    }
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    if (hi - lo <= cfg.root_tolerance * std::max(1.0, std::abs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

ScalingStep bounded_step(const FeatureMass& fm, double current, double target,
                         const EmisConfig& cfg) {
  const double clamp = cfg.weight_clamp;
  // Targets at the boundary have no finite fixed point: saturate the weight.
  if (target <= 0.0) {
    return {-clamp - current, true};
  }
  if (target >= 1.0 || fm.counts.empty()) {
    return {clamp - current, true};
  }
  double step = solve_scaling_root(fm, target, cfg);
  if (current + step > clamp) {
    return {clamp - current, true};
  }
  if (current + step < -clamp) {
    return {-clamp - current, true};
  }
  return {step, false};
}

}  // namespace

ScalingStep iterative_scaling_root(const MachineSpec& spec,
                                   const WeightMatrix& weights, int feature,
                                   double target, const EmisConfig& config) {
  if (feature < 0 || feature >= spec.feature_count()) {
    throw ShapeError("feature index out of range");
  }
  if (target < 0.0 || target > 1.0) {
    throw ShapeError("constraint target must lie in [0, 1]");
  }
  const ExactDistribution dist(spec, weights);
  const std::vector<FeatureMass> tables = feature_mass_tables(dist);
  return bounded_step(tables[static_cast<size_t>(feature)],
                      weights.value(feature), target, config);
}

MStepResult m_step(const MachineSpec& spec, const WeightMatrix& weights,
                   const ConstraintTargets& targets, const EmisConfig& config) {
  if (static_cast<int>(targets.size()) != spec.feature_count()) {
    throw ShapeError("target count does not match the feature count");
  }
  const int n = spec.feature_count();
  MStepResult result{weights, std::vector<std::uint8_t>(
                                  static_cast<size_t>(n), 0)};
  std::vector<double> steps(static_cast<size_t>(n));
  for (int round = 0; round < config.inner_iterations; ++round) {
    const ExactDistribution dist(spec, result.weights);
    const std::vector<FeatureMass> tables = feature_mass_tables(dist);
    // full parallel update: all roots against the same frozen distribution
    for (int i = 0; i < n; ++i) {
      const ScalingStep s =
          bounded_step(tables[static_cast<size_t>(i)],
                       result.weights.value(i), targets[static_cast<size_t>(i)],
                       config);
      steps[static_cast<size_t>(i)] = s.step;
      if (s.saturated) result.saturated[static_cast<size_t>(i)] = 1;
    }
    for (int i = 0; i < n; ++i) {
      result.weights.set_value(i, result.weights.value(i) +
                                      steps[static_cast<size_t>(i)]);
    }
  }
  return result;
}

namespace {

double max_abs_residual(const std::vector<double>& expectations,
                        const ConstraintTargets& targets) {
  double r = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    r = std::max(r, std::abs(expectations[i] - targets[i]));
  }
  return r;
}

double dot_weights(const WeightMatrix& w, const ConstraintTargets& t) {
  double q = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    q += w.value(static_cast<int>(i)) * t[i];
  }
  return q;
}

struct OuterStats {
  double log_likelihood;
  double entropy;
  double max_residual;
  double q_value;     // Q(w, w)
  double entropy_gap; // |Q(w, w) + H(p_w)|
  ConstraintTargets targets;
};

OuterStats outer_stats(const ExactDistribution& dist, const Dataset& data) {
  OuterStats s{0.0, 0.0, 0.0, 0.0, 0.0, e_step(dist, data)};
  s.log_likelihood = dist.log_likelihood(data);
  s.entropy = dist.entropy();
  s.max_residual = max_abs_residual(dist.feature_expectations(), s.targets);
  s.q_value = -dist.log_partition() + dot_weights(dist.weights(), s.targets);
  s.entropy_gap = std::abs(s.q_value + s.entropy);
  return s;
}

}  // namespace

TrainResult em_is(const MachineSpec& spec, const WeightMatrix& init,
                  const Dataset& data, const EmisConfig& config,
                  const IterationCallback& on_iteration) {
  validate_weights(init, config.weight_clamp);
  if (data.width() != spec.visible_count()) {
    throw ShapeError("dataset width does not match the machine spec");
  }

  TrainResult result{init, {}};
  result.trace.saturated.assign(static_cast<size_t>(spec.feature_count()), 0);
  double prev_ll = 0.0;
  int stall = 0;

  for (int outer = 0;; ++outer) {
    const ExactDistribution dist(spec, result.weights);
    const OuterStats stats = outer_stats(dist, data);
    const TraceRow row{outer, stats.log_likelihood, stats.entropy,
                       stats.max_residual, stats.q_value};
    result.trace.rows.push_back(row);
    if (on_iteration) on_iteration(row);

    const bool feasible = stats.max_residual <= config.feasibility_tolerance &&
                          stats.entropy_gap <= config.entropy_gap_tolerance;
    if (outer > 0 &&
        std::abs(stats.log_likelihood - prev_ll) < config.ll_tolerance) {
      if (feasible) {
        result.trace.termination = Termination::Converged;
        return result;
      }
      if (++stall >= config.stall_window) {
        result.trace.termination = Termination::Stalled;
        return result;
      }
    } else {
      stall = 0;
    }
    if (outer >= config.outer_cap) {
      result.trace.termination = Termination::IterationCap;
      return result;
    }
    prev_ll = stats.log_likelihood;

    MStepResult m = m_step(spec, result.weights, stats.targets, config);
    result.weights = std::move(m.weights);
    for (std::size_t i = 0; i < m.saturated.size(); ++i) {
      result.trace.saturated[i] |= m.saturated[i];
    }
  }
}

double q_value(const MachineSpec& spec, const WeightMatrix& weights,
               const WeightMatrix& snapshot, const Dataset& data) {
  const ConstraintTargets targets = e_step(spec, snapshot, data);
  const ExactDistribution dist(spec, weights);
  return -dist.log_partition() + dot_weights(weights, targets);
}

double h_value(const MachineSpec& spec, const WeightMatrix& weights,
               const WeightMatrix& snapshot, const Dataset& data) {
  const ExactDistribution dist_w(spec, weights);
  const ExactDistribution dist_snap(spec, snapshot);
  const int j = spec.visible_count();
  double h = 0.0;
  for (const auto& [y, w] : data.empirical()) {
    const double log_marginal = dist_w.observed_log_marginal(y);
    const std::vector<double> cond = dist_snap.hidden_conditional(y);
    for (std::uint32_t z = 0; z < cond.size(); ++z) {
      if (cond[z] == 0.0) continue;
      const double log_cond_w = dist_w.log_prob(y | (z << j)) - log_marginal;
      h -= w * cond[z] * log_cond_w;
    }
  }
  return h;
}

std::vector<double> q_gradient(const MachineSpec& spec,
                               const WeightMatrix& weights,
                               const WeightMatrix& snapshot,
                               const Dataset& data) {
  const ConstraintTargets targets = e_step(spec, snapshot, data);
  const ExactDistribution dist(spec, weights);
  std::vector<double> grad = dist.feature_expectations();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = targets[i] - grad[i];
  }
  return grad;
}

TrainResult gradient_em(const MachineSpec& spec, const WeightMatrix& init,
                        const Dataset& data, const GradientEmConfig& config,
                        const IterationCallback& on_iteration) {
  validate_weights(init, config.weight_clamp);
  if (data.width() != spec.visible_count()) {
    throw ShapeError("dataset width does not match the machine spec");
  }
  const int n = spec.feature_count();
  TrainResult result{init, {}};
  result.trace.saturated.assign(static_cast<size_t>(n), 0);
  double prev_ll = 0.0;
  int stall = 0;

  for (int outer = 0;; ++outer) {
    const ExactDistribution dist(spec, result.weights);
    const OuterStats stats = outer_stats(dist, data);
    const TraceRow row{outer, stats.log_likelihood, stats.entropy,
                       stats.max_residual, stats.q_value};
    result.trace.rows.push_back(row);
    if (on_iteration) on_iteration(row);

    const bool feasible = stats.max_residual <= config.feasibility_tolerance &&
                          stats.entropy_gap <= config.entropy_gap_tolerance;
    if (outer > 0 &&
        std::abs(stats.log_likelihood - prev_ll) < config.ll_tolerance) {
      if (feasible) {
        result.trace.termination = Termination::Converged;
        return result;
      }
      if (++stall >= config.stall_window) {
        result.trace.termination = Termination::Stalled;
        return result;
      }
    } else {
      stall = 0;
    }
    if (outer >= config.outer_cap) {
      result.trace.termination = Termination::IterationCap;
      return result;
    }
    prev_ll = stats.log_likelihood;

    // E-step quantities are frozen in stats.targets; ascend Q(., snapshot)
    // with step halving until the step stops decreasing Q.
    std::vector<double> grad = dist.feature_expectations();
    for (int i = 0; i < n; ++i) {
      grad[static_cast<size_t>(i)] =
          stats.targets[static_cast<size_t>(i)] - grad[static_cast<size_t>(i)];
    }
    double step = config.step_size;
    bool accepted = false;
    for (int attempt = 0; attempt < config.max_halvings; ++attempt) {
      WeightMatrix candidate = result.weights;
      for (int i = 0; i < n; ++i) {
        const double v = std::clamp(
            candidate.value(i) + step * grad[static_cast<size_t>(i)],
            -config.weight_clamp, config.weight_clamp);
        candidate.set_value(i, v);
      }
      const ExactDistribution cand_dist(spec, candidate);
      const double cand_q =
          -cand_dist.log_partition() + dot_weights(candidate, stats.targets);
      if (cand_q >= stats.q_value) {
        result.weights = std::move(candidate);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.trace.termination = Termination::Stalled;
      return result;
    }
  }
}

}  // namespace lmebm
