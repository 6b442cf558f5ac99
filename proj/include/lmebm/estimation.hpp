#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lmebm/dataset.hpp"
#include "lmebm/distribution.hpp"
#include "lmebm/machine.hpp"

namespace lmebm {

// Per-feature expectation targets computed at an E-step snapshot.
// Visible-visible entries depend only on the data; the mixed and hidden
// families are conditional expectations under the snapshot weights.
struct ConstraintTargets {
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

struct EmisConfig {
  int inner_iterations = 4;    // scaling rounds per M step
  int outer_cap = 500;
  double ll_tolerance = 1e-8;            // outer log-likelihood change
  double feasibility_tolerance = 1e-6;   // max |E[f_i] - target_i|
  // Convergence additionally requires |Q(w,w) + H(p_w)| below this, so that a
  // reported fixed point carries its entropy as -Q to full precision.
  double entropy_gap_tolerance = 1e-9;
  int stall_window = 20;

  // Root finder for the per-feature scaling updates.
  double bracket_half_width = 1.0;
  double bracket_expansion = 2.0;
  int max_expansions = 60;
  double root_tolerance = 1e-10;
  bool use_newton = true;

  double weight_clamp = kWeightClamp;
};

enum class Termination { Converged, IterationCap, Stalled };

std::string termination_name(Termination t);

struct TraceRow {
  int outer_iter;
  double log_likelihood;
  double entropy;
  double max_residual;
  double q_value;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  Termination termination = Termination::IterationCap;
  // Features whose weight hit the clamp during some scaling round.
  std::vector<std::uint8_t> saturated;

  bool converged() const { return termination == Termination::Converged; }
  const TraceRow& final_row() const { return rows.back(); }
};

struct TrainResult {
  WeightMatrix weights;
  TrainTrace trace;
};

using IterationCallback = std::function<void(const TraceRow&)>;

// E step: expectation targets for every feature at the snapshot weights.
ConstraintTargets e_step(const MachineSpec& spec, const WeightMatrix& snapshot,
                         const Dataset& data);
ConstraintTargets e_step(const ExactDistribution& snapshot_dist,
                         const Dataset& data);

// One-dimensional iterative-scaling update for a single feature: the step g
// solving  sum_x f_i(x) exp(g * n(x)) p(x) = target,  where n(x) counts the
// active pairs of x. Saturates at the weight clamp when the target is 0 or 1
// or the root would push the weight past the clamp.
struct ScalingStep {
  double step = 0.0;
  bool saturated = false;
};

ScalingStep iterative_scaling_root(const MachineSpec& spec,
                                   const WeightMatrix& weights, int feature,
                                   double target,
                                   const EmisConfig& config = {});

// Diagnostic thrown when the root bracket cannot be established.
struct BracketError : std::runtime_error {
  BracketError(const std::string& what, double lo, double hi, double g_lo,
               double g_hi)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi),
        value_lo(g_lo), value_hi(g_hi) {}
  double bracket_lo, bracket_hi;
  double value_lo, value_hi;   // g evaluated at both bracket ends
};

// M step: `inner_iterations` rounds of full parallel scaling updates. Each
// round solves all roots against the same frozen distribution, then commits
// them at once.
struct MStepResult {
  WeightMatrix weights;
  std::vector<std::uint8_t> saturated;
};

MStepResult m_step(const MachineSpec& spec, const WeightMatrix& weights,
                   const ConstraintTargets& targets, const EmisConfig& config);

// Full EM-IS: alternate E and M steps until the log-likelihood change,
// feasibility residual, and entropy gap all fall under tolerance.
TrainResult em_is(const MachineSpec& spec, const WeightMatrix& init,
                  const Dataset& data, const EmisConfig& config = {},
                  const IterationCallback& on_iteration = {});

// Q(w, snapshot) = -ln Z(w) + sum_i w_i * target_i(snapshot).
double q_value(const MachineSpec& spec, const WeightMatrix& weights,
               const WeightMatrix& snapshot, const Dataset& data);

// H(w, snapshot) = -sum_y p~(y) sum_z p_snapshot(z|y) ln p_w(z|y), so that
// log-likelihood = Q + H for any pair of weight matrices.
double h_value(const MachineSpec& spec, const WeightMatrix& weights,
               const WeightMatrix& snapshot, const Dataset& data);

// Gradient of Q(w, snapshot) in feature coordinates:
// target_i(snapshot) - E_w[f_i].
std::vector<double> q_gradient(const MachineSpec& spec,
                               const WeightMatrix& weights,
                               const WeightMatrix& snapshot,
                               const Dataset& data);

struct GradientEmConfig {
  double step_size = 0.5;      // halved until the Q step stops decreasing
  int outer_cap = 500;
  double ll_tolerance = 1e-8;
  double feasibility_tolerance = 1e-6;
  double entropy_gap_tolerance = 1e-9;
  int stall_window = 20;
  int max_halvings = 40;
  double weight_clamp = kWeightClamp;
};

// Generalized-EM baseline: per outer iteration, one accepted gradient step on
// Q with the fixed step size, halving on Q decrease.
TrainResult gradient_em(const MachineSpec& spec, const WeightMatrix& init,
                        const Dataset& data,
                        const GradientEmConfig& config = {},
                        const IterationCallback& on_iteration = {});

}  // namespace lmebm
