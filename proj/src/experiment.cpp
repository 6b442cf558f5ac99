#include "lmebm/experiment.hpp"

#include <cmath>
#include <ostream>

#include "lmebm/rng.hpp"

namespace lmebm {

double cross_entropy_observed(const ExactDistribution& truth,
                              const ExactDistribution& estimate) {
  if (truth.spec().visible_count() != estimate.spec().visible_count()) {
    throw ShapeError("visible counts differ between truth and estimate");
  }
  const std::uint32_t observed = truth.spec().observed_state_count();
  double d = 0.0;
  for (std::uint32_t y = 0; y < observed; ++y) {
    const double log_t = truth.observed_log_marginal(y);
    const double p_t = std::exp(log_t);
    if (p_t == 0.0) continue;
    d += p_t * (log_t - estimate.observed_log_marginal(y));
  }
  return d;
}

namespace {

TrialResult run_trial(const ExperimentConfig& config,
                      const ExactDistribution& truth_dist, int size_index,
                      int trial, int jobs) {
  const int sample_size = config.sample_sizes[static_cast<size_t>(size_index)];
  const std::uint64_t size_seed =
      derive_seed(config.master_seed, static_cast<std::uint64_t>(size_index));
  const std::uint64_t trial_seed =
      derive_seed(size_seed, static_cast<std::uint64_t>(trial));

  TrialResult result;
  result.sample_size = sample_size;
  result.trial = trial;

  const Dataset data = truth_dist.sample_observed(
      static_cast<std::size_t>(sample_size), derive_seed(trial_seed, 0));

  RestartPlan plan = config.restart_plan;
  plan.master_seed = derive_seed(trial_seed, 1);
  const std::vector<CandidateModel> candidates =
      run_restarts(config.estimator_spec, data, plan, config.emis, jobs);
  for (const CandidateModel& c : candidates) {
    if (c.converged) ++result.converged_candidates;
  }
  if (result.converged_candidates == 0) {
    result.ok = false;
    return result;
  }

  const CandidateModel& lme = select_lme(candidates);
  const CandidateModel& mle = select_mle(candidates);
  const ExactDistribution lme_dist(config.estimator_spec, lme.weights);
  const ExactDistribution mle_dist(config.estimator_spec, mle.weights);

  result.ok = true;
  result.cross_entropy_lme = cross_entropy_observed(truth_dist, lme_dist);
  result.cross_entropy_mle = cross_entropy_observed(truth_dist, mle_dist);
  result.log_likelihood_lme = lme.log_likelihood;
  result.log_likelihood_mle = mle.log_likelihood;
  result.entropy_lme = lme.entropy;
  result.entropy_mle = mle.entropy;
  return result;
}

}  // namespace

std::vector<TrialResult> run_experiment(const ExperimentConfig& config,
                                        int jobs, std::ostream* progress) {
  if (config.truth_spec.visible_count() !=
      config.estimator_spec.visible_count()) {
    throw ShapeError("truth and estimator visible counts must match");
  }
  if (config.trials < 1 || config.sample_sizes.empty()) {
    throw ShapeError("experiment needs at least one size and one trial");
  }
  const ExactDistribution truth_dist(config.truth_spec, config.truth_weights);
  std::vector<TrialResult> results;
  results.reserve(config.sample_sizes.size() *
                  static_cast<size_t>(config.trials));
  for (int size_index = 0;
       size_index < static_cast<int>(config.sample_sizes.size());
       ++size_index) {
    for (int trial = 0; trial < config.trials; ++trial) {
      results.push_back(
          run_trial(config, truth_dist, size_index, trial, jobs));
      if (progress != nullptr) {
        const TrialResult& r = results.back();
        *progress << config.name << " size " << r.sample_size << " trial "
                  << r.trial << ": ";
        if (r.ok) {
          *progress << "ce_lme " << r.cross_entropy_lme << " ce_mle "
                    << r.cross_entropy_mle << " (converged "
                    << r.converged_candidates << ")\n";
        } else {
          *progress << "failed (no converged candidate)\n";
        }
      }
    }
  }
  return results;
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double sample_std() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = (sum_sq - n * m * m) / (n - 1);
    return std::sqrt(std::max(var, 0.0));
  }
};

}  // namespace

std::vector<SizeSummary> aggregate(const std::vector<TrialResult>& results) {
  if (results.empty()) {
    throw ShapeError("nothing to aggregate");
  }
  std::vector<SizeSummary> summaries;
  for (const TrialResult& r : results) {
    SizeSummary* s = nullptr;
    for (SizeSummary& existing : summaries) {
      if (existing.sample_size == r.sample_size) {
        s = &existing;
        break;
      }
    }
    if (s == nullptr) {
      summaries.push_back(SizeSummary{r.sample_size, 0, {}, {}});
      s = &summaries.back();
    }
    if (r.ok) ++s->trials_ok;
  }
  for (SizeSummary& s : summaries) {
    Moments ce_lme, ce_mle, ll_lme, ll_mle, h_lme, h_mle;
    for (const TrialResult& r : results) {
      if (r.sample_size != s.sample_size || !r.ok) continue;
      ce_lme.add(r.cross_entropy_lme);
      ce_mle.add(r.cross_entropy_mle);
      ll_lme.add(r.log_likelihood_lme);
      ll_mle.add(r.log_likelihood_mle);
      h_lme.add(r.entropy_lme);
      h_mle.add(r.entropy_mle);
    }
    s.lme = MethodSummary{ce_lme.mean(), ce_lme.sample_std(), ll_lme.mean(),
                          h_lme.mean()};
    s.mle = MethodSummary{ce_mle.mean(), ce_mle.sample_std(), ll_mle.mean(),
                          h_mle.mean()};
  }
  return summaries;
}

std::vector<ExperimentConfig> make_scenarios(std::uint64_t master_seed) {
  constexpr int kVisible = 5;
  constexpr int kEstimatorHidden = 3;
  constexpr int kTruthHidden[] = {3, 5, 1};
  constexpr double kTruthScale = 2.0;
  constexpr double kMarginalFloor = 0.02;

  std::vector<ExperimentConfig> scenarios;
  for (int s = 0; s < 3; ++s) {
    const MachineSpec truth_spec(kVisible, kTruthHidden[s]);
    const std::uint64_t scenario_seed =
        derive_seed(master_seed, static_cast<std::uint64_t>(s));

    // reject ground truths whose visible bits are near-deterministic
    WeightMatrix truth(truth_spec.node_count());
    for (std::uint64_t attempt = 0;; ++attempt) {
      truth = random_weights(truth_spec.node_count(), kTruthScale,
                             derive_seed(scenario_seed, 1000 + attempt));
      const ExactDistribution dist(truth_spec, truth);
      bool degenerate = false;
      for (int k = 0; k < kVisible && !degenerate; ++k) {
        double on = 0.0;
        for (std::uint32_t y = 0; y < truth_spec.observed_state_count(); ++y) {
          if ((y >> k) & 1u) on += dist.observed_marginal(y);
        }
        degenerate = on < kMarginalFloor || on > 1.0 - kMarginalFloor;
      }
      if (!degenerate) break;
    }

    ExperimentConfig config{
        "exp" + std::to_string(s + 1),
        truth_spec,
        truth,
        MachineSpec(kVisible, kEstimatorHidden),
    };
    config.master_seed = derive_seed(scenario_seed, 0);
    scenarios.push_back(std::move(config));
  }
  return scenarios;
}

}  // namespace lmebm
