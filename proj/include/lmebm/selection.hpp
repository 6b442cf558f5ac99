#pragma once

#include <cstdint>
#include <vector>

#include "lmebm/dataset.hpp"
#include "lmebm/estimation.hpp"
#include "lmebm/machine.hpp"

namespace lmebm {

struct SelectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Converged (feasible) or attempted solution from one restart.
struct CandidateModel {
  WeightMatrix weights;
  double log_likelihood = 0.0;
  // For converged candidates this is -Q(w*, w*), the entropy byproduct of the
  // final M step; entropy_direct is the definitional value for cross-checks.
  double entropy = 0.0;
  double entropy_direct = 0.0;
  double residual = 0.0;
  bool converged = false;
  std::uint64_t init_seed = 0;
  int outer_iterations = 0;
  Termination termination = Termination::IterationCap;
};

struct RestartPlan {
  int restarts = 100;
  double init_width = 1.0;   // weights drawn i.i.d. uniform on [-w, w]
  std::uint64_t master_seed = 0;
};

// Upper-triangle weights i.i.d. uniform on [-width, width].
WeightMatrix random_weights(int node_count, double width, std::uint64_t seed);

// Run EM-IS from plan.restarts random initializations (seed = master + index)
// and collect every outcome in restart order. jobs = 0 means use all cores.
std::vector<CandidateModel> run_restarts(const MachineSpec& spec,
                                         const Dataset& data,
                                         const RestartPlan& plan,
                                         const EmisConfig& config = {},
                                         int jobs = 0);

// Highest entropy among converged candidates; ties broken by higher
// likelihood, then lower init seed.
const CandidateModel& select_lme(const std::vector<CandidateModel>& candidates);

// Highest likelihood among converged candidates; ties broken by higher
// entropy, then lower init seed.
const CandidateModel& select_mle(const std::vector<CandidateModel>& candidates);

// Number of distinct basins among converged candidates: weight matrices are
// grouped when they agree elementwise within tol. Reporting only; selection
// always sees every candidate.
int count_basins(const std::vector<CandidateModel>& candidates,
                 double tol = 1e-4);

}  // namespace lmebm
