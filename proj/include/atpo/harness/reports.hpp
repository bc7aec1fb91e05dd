#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "atpo/core/model_io.hpp"
#include "atpo/harness/experiment.hpp"

namespace atpo {

// Files written by emit_reports:
//
//   summary.csv    one row per agent (columns: summary_columns())
//   trials.csv     agent,seed,true_model,steps,return
//   entropy.csv    agent,t,mean_entropy
//   traces/<agent>-<seed>.csv   posterior traces of Bayesian agents
//   manifest.json  spec, seeds, agents, models and solver settings

inline const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols{
      "agent",          "trials",         "mean_return",      "std_return",       "normalized",
      "identified_trials", "first_identified_mean", "p_true_mean_t5", "p_true_mean_t10", "p_true_mean_t20",
      "p_true_median_t5", "p_true_median_t10", "p_true_median_t20", "argmax_t5",    "argmax_t10",
      "argmax_t20",     "identified_by_t5", "identified_by_t10", "identified_by_t20", "bound_checked",
      "bound_violations"};
  return cols;
}

inline std::string join_csv(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<AgentSummary>& rows) {
  os << join_csv(summary_columns()) << '\n';
  for (const auto& s : rows) {
    os << s.agent << ',' << s.trials << ',' << format_real(s.mean_return) << ',' << format_real(s.std_return) << ','
       << format_real(s.normalized) << ',' << s.identified_trials << ',' << format_real(s.first_identified_mean);
    for (const auto* arr : {&s.p_true_mean, &s.p_true_median, &s.argmax_fraction, &s.identified_by_fraction})
      for (double v : *arr) os << ',' << format_real(v);
    os << ',' << s.bound_checked << ',' << s.bound_violations << '\n';
  }
}

inline void write_entropy_csv(std::ostream& os, const std::vector<AgentSummary>& rows) {
  os << "agent,t,mean_entropy\n";
  for (const auto& s : rows)
    for (std::size_t t = 0; t < s.entropy_mean.size(); ++t)
      os << s.agent << ',' << t + 1 << ',' << format_real(s.entropy_mean[t]) << '\n';
}

inline void write_trials_csv(std::ostream& os, const std::vector<TrialResult>& trials) {
  os << "agent,seed,true_model,steps,return\n";
  for (const auto& t : trials)
    os << t.agent << ',' << t.seed << ',' << t.true_model << ',' << t.rewards.size() << ','
       << format_real(t.total_return) << '\n';
}

inline nlohmann::json manifest_json(const ExperimentReport& r) {
  nlohmann::json models = nlohmann::json::array();
  for (std::size_t k = 0; k < r.model_labels.size(); ++k) {
    nlohmann::json m{{"label", r.model_labels[k]}, {"hash", hex64(r.model_hashes[k])}};
    if (k < r.solver_info.size()) {
      const auto& i = r.solver_info[k];
      m["solver"] = {{"stages", i.stages},       {"beliefs", i.belief_set_size}, {"backups", i.backups},
                     {"residual", i.residual},   {"converged", i.converged}};
    }
    models.push_back(m);
  }
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : r.agents) agents.push_back(a.agent);
  return {{"format", "atpo-report"},     {"version", 1},
          {"spec", r.spec},              {"base_seed", r.base_seed},
          {"num_trials", r.num_trials},  {"agents", agents},
          {"skipped_agents", r.skipped_agents}, {"models", models}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
  if (!os) throw Error("write failed for " + p.string());
}

inline void emit_reports(const ExperimentReport& r, const std::filesystem::path& dir, bool traces = true) {
  std::filesystem::create_directories(dir);
  std::ostringstream summary, entropy, trials;
  write_summary_csv(summary, r.agents);
  write_entropy_csv(entropy, r.agents);
  write_trials_csv(trials, r.trials);
  write_text(dir / "summary.csv", summary.str());
  write_text(dir / "entropy.csv", entropy.str());
  write_text(dir / "trials.csv", trials.str());
  write_text(dir / "manifest.json", manifest_json(r).dump(2) + "\n");
  if (!traces) return;
  for (const auto& t : r.trials) {
    if (t.trace.empty()) continue;
    std::filesystem::create_directories(dir / "traces");
    std::ostringstream os;
    write_trace_csv(os, t.trace, t.trace.front().posterior.size());
    write_text(dir / "traces" / (t.agent + "-" + std::to_string(t.seed) + ".csv"), os.str());
  }
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p,
                                                      const std::vector<std::string>& expected_header) {
  std::ifstream is(p);
  if (!is) throw FormatError("cannot open " + p.string());
  std::string line;
  if (!std::getline(is, line) || split_csv(line) != expected_header)
    throw FormatError(p.string() + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != expected_header.size()) throw FormatError(p.string() + ": wrong number of columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

/// Reads summary.csv and entropy.csv back into agent summaries.
inline std::vector<AgentSummary> read_summaries(const std::filesystem::path& dir) {
  std::vector<AgentSummary> out;
  for (const auto& c : read_csv(dir / "summary.csv", summary_columns())) {
    AgentSummary s;
    std::size_t i = 0;
    s.agent = c[i++];
    s.trials = std::stoul(c[i++]);
    s.mean_return = parse_real(c[i++]);
    s.std_return = parse_real(c[i++]);
    s.normalized = parse_real(c[i++]);
    s.identified_trials = std::stoul(c[i++]);
    s.first_identified_mean = parse_real(c[i++]);
    for (auto* arr : {&s.p_true_mean, &s.p_true_median, &s.argmax_fraction, &s.identified_by_fraction})
      for (double& v : *arr) v = parse_real(c[i++]);
    s.bound_checked = std::stoul(c[i++]);
    s.bound_violations = std::stoul(c[i++]);
    out.push_back(std::move(s));
  }
  for (const auto& c : read_csv(dir / "entropy.csv", {"agent", "t", "mean_entropy"})) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AgentSummary& s) { return s.agent == c[0]; });
    if (it == out.end()) throw FormatError("entropy.csv: unknown agent '" + c[0] + "'");
    if (std::stoul(c[1]) != it->entropy_mean.size() + 1) throw FormatError("entropy.csv: steps out of order");
    it->entropy_mean.push_back(parse_real(c[2]));
  }
  return out;
}

inline void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows) {
  os << "library_size,atpo_mean,atpo_std,vi_mean,random_mean,normalized,median_trial_score\n";
  for (const auto& r : rows)
    os << r.library_size << ',' << format_real(r.atpo_mean) << ',' << format_real(r.atpo_std) << ','
       << format_real(r.vi_mean) << ',' << format_real(r.random_mean) << ',' << format_real(r.normalized) << ','
       << format_real(median_of(r.trial_scores)) << '\n';
}

}  // namespace atpo
