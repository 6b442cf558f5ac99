#include "lmebm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lmebm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot open " + path + " for writing");
  }
  out << body;
  if (!out) {
    throw ParseError("failed writing " + path);
  }
}

}  // namespace

ModelFile load_model(const std::string& path) {
  const nlohmann::json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("visible_count") ||
      !j.contains("hidden_count")) {
    throw ParseError(path + ": model file needs visible_count and hidden_count");
  }
  ModelFile model{
      MachineSpec(j.at("visible_count").get<int>(),
                  j.at("hidden_count").get<int>()),
      WeightMatrix(1),
      std::nullopt,
  };
  model.weights = WeightMatrix(model.spec.node_count());
  if (j.contains("weights")) {
    for (const auto& entry : j.at("weights")) {
      const int a = entry.at("a").get<int>();
      const int b = entry.at("b").get<int>();
      if (a >= b) {
        throw ParseError(path + ": weight entries must have a < b");
      }
      try {
        model.weights.set_entry(a, b, entry.at("value").get<double>());
      } catch (const ShapeError& e) {
        throw ParseError(path + ": " + e.what());
      }
    }
  }
  try {
    validate_weights(model.weights);
  } catch (const ShapeError& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.contains("selection")) {
    model.selection = j.at("selection").get<std::string>();
  }
  return model;
}

void save_model(const std::string& path, const MachineSpec& spec,
                const WeightMatrix& weights,
                const std::optional<std::string>& selection) {
  nlohmann::json j;
  j["visible_count"] = spec.visible_count();
  j["hidden_count"] = spec.hidden_count();
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < spec.feature_count(); ++i) {
    const double v = weights.value(i);
    if (v == 0.0) continue;
    const auto [a, b] = spec.feature_pair(i);
    entries.push_back({{"a", a}, {"b", b}, {"value", v}});
  }
  j["weights"] = std::move(entries);
  if (selection) {
    j["selection"] = *selection;
  }
  write_text_file(path, j.dump(2) + "\n");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  std::vector<std::uint32_t> rows;
  int width = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string tok;
    std::uint32_t mask = 0;
    int bits = 0;
    bool comment = false;
    while (tokens >> tok) {
      if (tok[0] == '#') {
        comment = true;
        break;
      }
      if (tok != "0" && tok != "1") {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected 0 or 1, got '" + tok + "'");
      }
      if (bits >= 31) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": observation too wide");
      }
      if (tok == "1") mask |= 1u << bits;
      ++bits;
    }
    if (comment || bits == 0) continue;
    if (width < 0) {
      width = bits;
    } else if (bits != width) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " components, got " +
                       std::to_string(bits));
    }
    rows.push_back(mask);
  }
  if (rows.empty()) {
    throw ParseError(path + ": no observations");
  }
  return Dataset(width, std::move(rows));
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ostringstream out;
  for (std::size_t t = 0; t < data.size(); ++t) {
    for (int k = 0; k < data.width(); ++k) {
      if (k > 0) out << ' ';
      out << ((data.row(t) >> k) & 1u);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

const char* kConfigKeys[] = {
    "inner_iterations",  "outer_cap",
    "ll_tolerance",      "feasibility_tolerance",
    "entropy_gap_tolerance", "stall_window",
    "bracket_half_width", "bracket_expansion",
    "max_expansions",    "root_tolerance",
    "use_newton",        "weight_clamp",
};

std::string valid_keys_message() {
  std::string msg = "valid keys:";
  for (const char* k : kConfigKeys) {
    msg += " ";
    msg += k;
  }
  return msg;
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid numeric value '" + value + "' for " + key);
  }
}

}  // namespace

void apply_config_entry(EmisConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "inner_iterations") {
    config.inner_iterations = static_cast<int>(parse_number(key, value));
    if (config.inner_iterations < 1) {
      throw ParseError("inner_iterations must be at least 1");
    }
  } else if (key == "outer_cap") {
    config.outer_cap = static_cast<int>(parse_number(key, value));
  } else if (key == "ll_tolerance") {
    config.ll_tolerance = parse_number(key, value);
  } else if (key == "feasibility_tolerance") {
    config.feasibility_tolerance = parse_number(key, value);
  } else if (key == "entropy_gap_tolerance") {
    config.entropy_gap_tolerance = parse_number(key, value);
  } else if (key == "stall_window") {
    config.stall_window = static_cast<int>(parse_number(key, value));
  } else if (key == "bracket_half_width") {
    config.bracket_half_width = parse_number(key, value);
  } else if (key == "bracket_expansion") {
    config.bracket_expansion = parse_number(key, value);
  } else if (key == "max_expansions") {
    config.max_expansions = static_cast<int>(parse_number(key, value));
  } else if (key == "root_tolerance") {
    config.root_tolerance = parse_number(key, value);
  } else if (key == "use_newton") {
    if (value == "true" || value == "1") {
      config.use_newton = true;
    } else if (value == "false" || value == "0") {
      config.use_newton = false;
    } else {
      throw ParseError("use_newton expects true/false");
    }
  } else if (key == "weight_clamp") {
    config.weight_clamp = parse_number(key, value);
  } else {
    throw ParseError("unknown config key '" + key + "'; " +
                     valid_keys_message());
  }
}

EmisConfig load_emis_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  EmisConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string key, value, extra;
    if (!(tokens >> key) || key[0] == '#') continue;
    if (!(tokens >> value) || (tokens >> extra)) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 'key value'");
    }
    try {
      apply_config_entry(config, key, value);
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

std::string trace_csv(const TrainTrace& trace) {
  std::ostringstream out;
  out << "outer_iter,log_likelihood,entropy,max_residual,q_value\n";
  for (const TraceRow& row : trace.rows) {
    out << row.outer_iter << ',' << format_double(row.log_likelihood) << ','
        << format_double(row.entropy) << ',' << format_double(row.max_residual)
        << ',' << format_double(row.q_value) << '\n';
  }
  return out.str();
}

std::string candidates_csv(const std::vector<CandidateModel>& candidates) {
  std::ostringstream out;
  out << "seed,converged,log_likelihood,entropy,residual,outer_iters\n";
  for (const CandidateModel& c : candidates) {
    out << c.init_seed << ',' << (c.converged ? 1 : 0) << ','
        << format_double(c.log_likelihood) << ',' << format_double(c.entropy)
        << ',' << format_double(c.residual) << ',' << c.outer_iterations
        << '\n';
  }
  return out.str();
}

std::string results_csv(const std::string& scenario,
                        const std::vector<TrialResult>& results) {
  std::ostringstream out;
  out << "scenario,sample_size,trial,method,cross_entropy,log_likelihood,"
         "entropy,converged_candidates\n";
  for (const TrialResult& r : results) {
    if (!r.ok) {
      out << scenario << ',' << r.sample_size << ',' << r.trial
          << ",failed,,,," << r.converged_candidates << '\n';
      continue;
    }
    out << scenario << ',' << r.sample_size << ',' << r.trial << ",lme,"
        << format_double(r.cross_entropy_lme) << ','
        << format_double(r.log_likelihood_lme) << ','
        << format_double(r.entropy_lme) << ',' << r.converged_candidates
        << '\n';
    out << scenario << ',' << r.sample_size << ',' << r.trial << ",mle,"
        << format_double(r.cross_entropy_mle) << ','
        << format_double(r.log_likelihood_mle) << ','
        << format_double(r.entropy_mle) << ',' << r.converged_candidates
        << '\n';
  }
  return out.str();
}

std::string aggregate_csv(const std::string& scenario,
                          const std::vector<SizeSummary>& summaries) {
  std::ostringstream out;
  out << "scenario,sample_size,method,mean_ce,std_ce,mean_ll,mean_entropy\n";
  for (const SizeSummary& s : summaries) {
    out << scenario << ',' << s.sample_size << ",lme,"
        << format_double(s.lme.mean_cross_entropy) << ','
        << format_double(s.lme.std_cross_entropy) << ','
        << format_double(s.lme.mean_log_likelihood) << ','
        << format_double(s.lme.mean_entropy) << '\n';
    out << scenario << ',' << s.sample_size << ",mle,"
        << format_double(s.mle.mean_cross_entropy) << ','
        << format_double(s.mle.std_cross_entropy) << ','
        << format_double(s.mle.mean_log_likelihood) << ','
        << format_double(s.mle.mean_entropy) << '\n';
  }
  return out.str();
}

void save_trace_csv(const std::string& path, const TrainTrace& trace) {
  write_text_file(path, trace_csv(trace));
}

void save_candidates_csv(const std::string& path,
                         const std::vector<CandidateModel>& candidates) {
  write_text_file(path, candidates_csv(candidates));
}

void save_results_csv(const std::string& path, const std::string& scenario,
                      const std::vector<TrialResult>& results) {
  write_text_file(path, results_csv(scenario, results));
}

void save_aggregate_csv(const std::string& path, const std::string& scenario,
                        const std::vector<SizeSummary>& summaries) {
  write_text_file(path, aggregate_csv(scenario, summaries));
}

}  // namespace lmebm
