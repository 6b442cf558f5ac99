#include "lmebm/selection.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "lmebm/rng.hpp"

namespace lmebm {

WeightMatrix random_weights(int node_count, double width, std::uint64_t seed) {
  WeightMatrix w(node_count);
  std::mt19937_64 gen(seed);
  for (int i = 0; i < w.value_count(); ++i) {
    w.set_value(i, uniform_range(gen, -width, width));
  }
  return w;
}

namespace {

CandidateModel run_one_restart(const MachineSpec& spec, const Dataset& data,
                               const RestartPlan& plan,
                               const EmisConfig& config, int index) {
  const std::uint64_t seed =
      plan.master_seed + static_cast<std::uint64_t>(index);
  const WeightMatrix init =
      random_weights(spec.node_count(), plan.init_width, seed);
  TrainResult run = em_is(spec, init, data, config);

  const TraceRow& last = run.trace.final_row();
  CandidateModel cand{std::move(run.weights),
                      last.log_likelihood,
                      0.0,
                      last.entropy,
                      last.max_residual,
                      run.trace.converged(),
                      seed,
                      last.outer_iter,
                      run.trace.termination};
  // Feasible solutions carry their entropy as -Q(w*, w*); elsewhere the
  // byproduct identity does not hold, so fall back to the direct value.
  cand.entropy = cand.converged ? -last.q_value : last.entropy;
  return cand;
}

int resolve_jobs(int jobs, int work_items) {
  if (jobs < 1) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
  }
  return std::min(jobs, work_items);
}

}  // namespace

std::vector<CandidateModel> run_restarts(const MachineSpec& spec,
                                         const Dataset& data,
                                         const RestartPlan& plan,
                                         const EmisConfig& config, int jobs) {
  if (plan.restarts < 1) {
    throw ShapeError("restart count must be at least 1");
  }
  if (!(plan.init_width >= 0.0)) {
    throw ShapeError("init width must be non-negative");
  }
  std::vector<CandidateModel> candidates(
      static_cast<size_t>(plan.restarts),
      CandidateModel{WeightMatrix(spec.node_count())});
  const int workers = resolve_jobs(jobs, plan.restarts);
  if (workers <= 1) {
    for (int r = 0; r < plan.restarts; ++r) {
      candidates[static_cast<size_t>(r)] =
          run_one_restart(spec, data, plan, config, r);
    }
    return candidates;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < plan.restarts;
           r = next.fetch_add(1)) {
        candidates[static_cast<size_t>(r)] =
            run_one_restart(spec, data, plan, config, r);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return candidates;
}

namespace {

// true when a beats b for the given primary/secondary keys
bool better(double a_primary, double a_secondary, std::uint64_t a_seed,
            double b_primary, double b_secondary, std::uint64_t b_seed) {
  if (a_primary != b_primary) return a_primary > b_primary;
  if (a_secondary != b_secondary) return a_secondary > b_secondary;
  return a_seed < b_seed;
}

}  // namespace

const CandidateModel& select_lme(
    const std::vector<CandidateModel>& candidates) {
  const CandidateModel* best = nullptr;
  for (const CandidateModel& c : candidates) {
    if (!c.converged) continue;
    if (best == nullptr ||
        better(c.entropy, c.log_likelihood, c.init_seed, best->entropy,
               best->log_likelihood, best->init_seed)) {
      best = &c;
    }
  }
  if (best == nullptr) {
    throw SelectionError("no converged candidate to select from");
  }
  return *best;
}

const CandidateModel& select_mle(
    const std::vector<CandidateModel>& candidates) {
  const CandidateModel* best = nullptr;
  for (const CandidateModel& c : candidates) {
    if (!c.converged) continue;
    if (best == nullptr ||
        better(c.log_likelihood, c.entropy, c.init_seed, best->log_likelihood,
               best->entropy, best->init_seed)) {
      best = &c;
    }
  }
  if (best == nullptr) {
    throw SelectionError("no converged candidate to select from");
  }
  return *best;
}

int count_basins(const std::vector<CandidateModel>& candidates, double tol) {
  std::vector<const WeightMatrix*> reps;
  for (const CandidateModel& c : candidates) {
    if (!c.converged) continue;
    bool found = false;
    for (const WeightMatrix* rep : reps) {
      bool close = true;
      for (int i = 0; i < rep->value_count() && close; ++i) {
        close = std::abs(rep->value(i) - c.weights.value(i)) <= tol;
      }
      if (close) {
        found = true;
        break;
      }
    }
    if (!found) reps.push_back(&c.weights);
  }
  return static_cast<int>(reps.size());
}

}  // namespace lmebm
