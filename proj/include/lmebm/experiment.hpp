#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmebm/distribution.hpp"
#include "lmebm/estimation.hpp"
#include "lmebm/selection.hpp"

namespace lmebm {

// One generative scenario: sample data from the truth, fit the estimator
// architecture with multi-restart EM-IS, select LME and MLE, score both by
// cross entropy against the true observed marginal.
struct ExperimentConfig {
  std::string name;
  MachineSpec truth_spec;
  WeightMatrix truth_weights;
  MachineSpec estimator_spec;
  std::vector<int> sample_sizes = {50, 100, 200, 500, 1000};
  int trials = 5;
  RestartPlan restart_plan;
  EmisConfig emis;
  std::uint64_t master_seed = 0;
};

struct TrialResult {
  int sample_size = 0;
  int trial = 0;
  bool ok = false;   // false when no restart converged
  double cross_entropy_lme = 0.0;
  double cross_entropy_mle = 0.0;
  double log_likelihood_lme = 0.0;
  double log_likelihood_mle = 0.0;
  double entropy_lme = 0.0;
  double entropy_mle = 0.0;
  int converged_candidates = 0;
};

struct MethodSummary {
  double mean_cross_entropy = 0.0;
  double std_cross_entropy = 0.0;
  double mean_log_likelihood = 0.0;
  double mean_entropy = 0.0;
};

struct SizeSummary {
  int sample_size = 0;
  int trials_ok = 0;
  MethodSummary lme;
  MethodSummary mle;
};

// KL divergence D(p_truth(y) || p_estimate(y)) over the observed marginals,
// in nats. Hidden counts may differ; visible counts must match.
double cross_entropy_observed(const ExactDistribution& truth,
                              const ExactDistribution& estimate);

// All trials for every sample size, deterministic in config.master_seed.
// Progress lines go to *progress when given.
std::vector<TrialResult> run_experiment(const ExperimentConfig& config,
                                        int jobs = 0,
                                        std::ostream* progress = nullptr);

// Per-size mean / sample standard deviation over the successful trials.
std::vector<SizeSummary> aggregate(const std::vector<TrialResult>& results);

// The three stock scenarios: truth hidden counts 3, 5, 1 against a 5-visible,
// 3-hidden estimator. Ground-truth weights are drawn uniform on [-2, 2] and
// redrawn until every single-visible-bit marginal lies in [0.02, 0.98].
std::vector<ExperimentConfig> make_scenarios(std::uint64_t master_seed);

}  // namespace lmebm
