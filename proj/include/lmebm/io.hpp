#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmebm/dataset.hpp"
#include "lmebm/estimation.hpp"
#include "lmebm/experiment.hpp"
#include "lmebm/machine.hpp"
#include "lmebm/selection.hpp"

namespace lmebm {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFile {
  MachineSpec spec;
  WeightMatrix weights;
  std::optional<std::string> selection;   // "lme" or "mle" when annotated
};

// Model files are JSON: visible_count, hidden_count, and the non-zero strict
// upper triangle as {a, b, value} triples (0-based node indices). Values
// round-trip bit-exactly.
ModelFile load_model(const std::string& path);
void save_model(const std::string& path, const MachineSpec& spec,
                const WeightMatrix& weights,
                const std::optional<std::string>& selection = std::nullopt);

// Dataset files: one observation per line, space-separated 0/1 components;
// '#' starts a comment line. Errors cite the offending line number.
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);

// Key-value config file mirroring the EmisConfig field names.
EmisConfig load_emis_config(const std::string& path);
void apply_config_entry(EmisConfig& config, const std::string& key,
                        const std::string& value);

void save_trace_csv(const std::string& path, const TrainTrace& trace);
void save_candidates_csv(const std::string& path,
                         const std::vector<CandidateModel>& candidates);
void save_results_csv(const std::string& path, const std::string& scenario,
                      const std::vector<TrialResult>& results);
void save_aggregate_csv(const std::string& path, const std::string& scenario,
                        const std::vector<SizeSummary>& summaries);

// In-memory CSV bodies (used by the writers above and by determinism checks).
std::string trace_csv(const TrainTrace& trace);
std::string candidates_csv(const std::vector<CandidateModel>& candidates);
std::string results_csv(const std::string& scenario,
                        const std::vector<TrialResult>& results);
std::string aggregate_csv(const std::string& scenario,
                          const std::vector<SizeSummary>& summaries);

// 17-significant-digit decimal form (round-trips doubles bit-exactly); used
// everywhere a double is printed to a file.
std::string format_double(double v);

}  // namespace lmebm
