#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "atpo/agents/agents.hpp"
#include "atpo/bayes/bound.hpp"
#include "atpo/bayes/trace.hpp"
#include "atpo/domains/domain_spec.hpp"
#include "atpo/harness/worker_pool.hpp"
#include "atpo/solvers/policy_cache.hpp"

namespace atpo {

/// A built and solved library, ready to run trials against.
struct PreparedDomain {
  DomainSpec spec;
  std::shared_ptr<const ModelLibrary> library;
  std::shared_ptr<const std::vector<StateValueFunction>> mdp_values;
  std::size_t cache_hits = 0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;

  AgentResources resources() const { return {library, mdp_values}; }
};

struct PrepareOptions {
  PolicyCache cache;
  std::size_t workers = 1;
  std::size_t sparse_threshold = kDefaultSparseThreshold;
  double vi_tolerance = 1e-6;
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

inline PreparedDomain prepare_domain(const DomainSpec& spec, const PrepareOptions& opts = {}) {
  PreparedDomain out;
  out.spec = spec;
  auto t0 = std::chrono::steady_clock::now();
  auto models = build_models(spec, opts.sparse_threshold);
  out.setup_seconds = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<AlphaVectorPolicy> policies(models.size());
  std::vector<char> hits(models.size(), 0);
  parallel_for(models.size(), opts.workers, [&](std::size_t k) {
    bool hit = false;
    policies[k] = opts.cache.get_or_solve(models[k], spec.perseus, &hit);
    hits[k] = hit;
  });
  out.cache_hits = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));
  out.library = std::make_shared<const ModelLibrary>(std::move(models), std::move(policies));
  out.mdp_values = solve_induced_mdps(*out.library, opts.vi_tolerance);
  out.solve_seconds = detail::seconds_since(t0);
  return out;
}

struct TrialOptions {
  AgentOptions agent;
  /// Record per-step losses of Bayesian agents and check the regret bound.
  bool record_bound = true;
};

struct TrialResult {
  std::string domain;
  std::string agent;
  std::uint64_t seed = 0;
  std::size_t true_model = 0;
  Index initial_state = 0;
  std::vector<Index> actions;
  std::vector<Index> observations;
  std::vector<Index> states;  // state after each step
  std::vector<double> rewards;
  double total_return = 0.0;
  std::vector<TraceRecord> trace;  // Bayesian agents only
  std::vector<BoundStep> bound_steps;
  std::optional<BoundReport> bound;
  double wall_seconds = 0.0;

  /// Everything except the wall time.
  bool same_outcome(const TrialResult& o) const {
    auto same_trace = [](const std::vector<TraceRecord>& a, const std::vector<TraceRecord>& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].t != b[i].t || a[i].action != b[i].action || a[i].observation != b[i].observation ||
            a[i].posterior != b[i].posterior || a[i].likelihoods != b[i].likelihoods)
          return false;
      return true;
    };
    return domain == o.domain && agent == o.agent && seed == o.seed && true_model == o.true_model &&
           initial_state == o.initial_state && actions == o.actions && observations == o.observations &&
           states == o.states && rewards == o.rewards && total_return == o.total_return && same_trace(trace, o.trace);
  }
};

/// Refuses agents whose requirements the library cannot meet.
inline void check_capabilities(const Agent& agent, const ModelLibrary& lib) {
  if (agent.capabilities().needs_common_state_space && !lib.common_state_space())
    throw ConfigurationError(agent.name() + " requires a common state space across the library");
}

/// One episode of spec.horizon steps. The ground-truth model, initial state
/// and environment noise come from one seeded stream and the agent's choices
/// from another, so every agent faces the same environment draws for a seed.
inline TrialResult run_trial(const PreparedDomain& p, const std::string& agent_name, std::uint64_t seed,
                             const TrialOptions& opts = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelLibrary& lib = *p.library;
  auto agent = make_agent(agent_name, p.resources(), opts.agent);
  check_capabilities(*agent, lib);
  const Capabilities caps = agent->capabilities();

  Rng env = make_stream(seed, "environment");
  Rng rng = make_stream(seed, "agent");

  TrialResult r;
  r.domain = p.spec.domain;
  r.agent = agent_name;
  r.seed = seed;
  const std::vector<double> uniform(lib.size(), 1.0 / static_cast<double>(lib.size()));
  r.true_model = sample_index(uniform, env);
  const TabularPomdp& m = lib.model(r.true_model);
  Index x = sample_belief(m.initial_belief(), env);
  r.initial_state = x;

  EpisodeContext ctx;
  if (caps.needs_true_model) ctx.true_model = r.true_model;
  if (caps.needs_full_state) ctx.state = x;
  agent->reset(ctx);

  for (std::size_t t = 0; t < p.spec.horizon; ++t) {
    const Index a = agent->act(rng);
    const PosteriorState* post = agent->posterior();
    if (post && opts.record_bound)
      r.bound_steps.push_back({post->posterior, step_loss(lib, *post, a, r.true_model).per_model});
    const StepSample s = simulate_step(m, x, a, env);
    r.actions.push_back(a);
    r.observations.push_back(s.observation);
    r.states.push_back(s.next_state);
    r.rewards.push_back(s.reward);
    r.total_return += s.reward;
    agent->observe(a, s.observation, caps.needs_full_state ? std::optional<Index>(s.next_state) : std::nullopt);
    if (post) r.trace.push_back(make_trace_record(*post, a, s.observation));
    x = s.next_state;
  }
  if (!r.bound_steps.empty()) {
    std::vector<double> q(lib.size(), 0.0);
    q[r.true_model] = 1.0;
    r.bound = check_bound(r.bound_steps, q, lib.reward_bound(), lib.max_discount());
  }
  r.wall_seconds = detail::seconds_since(t0);
  return r;
}

inline constexpr std::array<std::size_t, 3> kIdentificationSteps{5, 10, 20};

struct AgentSummary {
  std::string agent;
  std::size_t trials = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  /// (mean - mean_random) / (mean_vi - mean_random); NaN when either anchor is absent.
  double normalized = std::numeric_limits<double>::quiet_NaN();
  // Posterior statistics, for agents that keep one; NaN otherwise.
  std::size_t identified_trials = 0;  // true model became the strict argmax at some step
  double first_identified_mean = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 3> p_true_mean{};
  std::array<double, 3> p_true_median{};
  std::array<double, 3> argmax_fraction{};
  /// Fraction of trials whose true model was the strict argmax at some step <= t.
  std::array<double, 3> identified_by_fraction{};
  std::vector<double> entropy_mean;  // by step, 1-based
  std::size_t bound_checked = 0;
  std::size_t bound_violations = 0;
};

struct ExperimentReport {
  DomainSpec spec;
  std::vector<std::string> model_labels;
  std::vector<std::uint64_t> model_hashes;
  std::vector<SolverInfo> solver_info;
  std::uint64_t base_seed = 0;
  std::size_t num_trials = 0;
  std::vector<std::string> skipped_agents;
  std::vector<AgentSummary> agents;
  std::vector<TrialResult> trials;

  const AgentSummary* find(const std::string& agent) const {
    for (const auto& a : agents)
      if (a.agent == agent) return &a;
    return nullptr;
  }
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation; 0 for fewer than two values.
inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double normalized_score(double value, double vi, double random) {
  if (!(vi != random)) return std::numeric_limits<double>::quiet_NaN();
  return (value - random) / (vi - random);
}

/// True model is the strict argmax of p.
inline bool identifies(const std::vector<double>& p, std::size_t k) {
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != k && p[j] >= p[k]) return false;
  return true;
}

/// Aggregates the trials of one agent. The result does not depend on the
/// order of `trials`.
inline AgentSummary summarize(const std::string& agent, std::vector<const TrialResult*> trials) {
  std::sort(trials.begin(), trials.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
  AgentSummary s;
  s.agent = agent;
  s.trials = trials.size();
  std::vector<double> returns;
  for (const auto* t : trials) returns.push_back(t->total_return);
  s.mean_return = mean_of(returns);
  s.std_return = stddev_of(returns);

  const bool bayesian = !trials.empty() && std::all_of(trials.begin(), trials.end(),
                                                       [](auto* t) { return !t->trace.empty(); });
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.p_true_mean.fill(nan);
  s.p_true_median.fill(nan);
  s.argmax_fraction.fill(nan);
  s.identified_by_fraction.fill(nan);
  if (!bayesian) return s;

  std::vector<double> firsts;
  for (std::size_t i = 0; i < kIdentificationSteps.size(); ++i) {
    const std::size_t step = kIdentificationSteps[i];
    std::vector<double> p_true;
    std::size_t hits = 0;
    for (const auto* t : trials) {
      if (t->trace.size() < step) continue;
      const auto& post = t->trace[step - 1].posterior;
      p_true.push_back(post[t->true_model]);
      hits += identifies(post, t->true_model);
    }
    if (p_true.empty()) continue;
    s.p_true_mean[i] = mean_of(p_true);
    s.p_true_median[i] = median_of(p_true);
    s.argmax_fraction[i] = static_cast<double>(hits) / static_cast<double>(p_true.size());
  }
  std::size_t longest = 0;
  for (const auto* t : trials) {
    longest = std::max(longest, t->trace.size());
    for (std::size_t i = 0; i < t->trace.size(); ++i)
      if (identifies(t->trace[i].posterior, t->true_model)) {
        firsts.push_back(static_cast<double>(i + 1));
        break;
      }
    if (t->bound) {
      ++s.bound_checked;
      s.bound_violations += t->bound->violated;
    }
  }
  s.identified_trials = firsts.size();
  s.first_identified_mean = mean_of(firsts);
  for (std::size_t i = 0; i < kIdentificationSteps.size(); ++i) {
    const auto by = std::count_if(firsts.begin(), firsts.end(),
                                  [&](double f) { return f <= static_cast<double>(kIdentificationSteps[i]); });
    s.identified_by_fraction[i] = static_cast<double>(by) / static_cast<double>(trials.size());
  }
  for (std::size_t i = 0; i < longest; ++i) {
    std::vector<double> h;
    for (const auto* t : trials)
      if (i < t->trace.size()) h.push_back(t->trace[i].entropy);
    s.entropy_mean.push_back(mean_of(h));
  }
  return s;
}

inline void apply_normalization(std::vector<AgentSummary>& summaries) {
  const AgentSummary *vi = nullptr, *rnd = nullptr;
  for (const auto& s : summaries) {
    if (s.agent == "vi") vi = &s;
    if (s.agent == "random") rnd = &s;
  }
  if (!vi || !rnd) return;
  const double hi = vi->mean_return, lo = rnd->mean_return;
  for (auto& s : summaries) s.normalized = normalized_score(s.mean_return, hi, lo);
}

struct ExperimentOptions {
  TrialOptions trial;
  std::size_t workers = 1;
  /// Leave out agents the library cannot support instead of failing.
  bool skip_unsupported = false;
  bool keep_trials = true;
};

/// Agents the library can run. Throws for an unknown name.
inline bool agent_supported(const PreparedDomain& p, const std::string& name) {
  if (std::find(agent_names().begin(), agent_names().end(), name) == agent_names().end())
    throw ConfigurationError("unknown agent '" + name + "'");
  return name != "bopa" || p.library->common_state_space();
}

/// n_trials seeded trials per agent with seeds base_seed .. base_seed + n - 1.
inline ExperimentReport run_experiment(const PreparedDomain& p, const std::vector<std::string>& agents,
                                       std::size_t n_trials, std::uint64_t base_seed,
                                       const ExperimentOptions& opts = {}) {
  ExperimentReport rep;
  rep.spec = p.spec;
  rep.base_seed = base_seed;
  rep.num_trials = n_trials;
  for (std::size_t k = 0; k < p.library->size(); ++k) {
    rep.model_labels.push_back(p.library->model(k).label());
    rep.model_hashes.push_back(p.library->model(k).content_hash());
    rep.solver_info.push_back(p.library->policy(k).info());
  }
  std::vector<std::string> runnable;
  for (const auto& a : agents) {
    if (agent_supported(p, a)) {
      runnable.push_back(a);
    } else if (opts.skip_unsupported) {
      rep.skipped_agents.push_back(a);
    } else {
      throw ConfigurationError(a + " requires a common state space across the library");
    }
  }
  std::vector<TrialResult> results(runnable.size() * n_trials);
  parallel_for(results.size(), opts.workers, [&](std::size_t i) {
    results[i] = run_trial(p, runnable[i / n_trials], base_seed + i % n_trials, opts.trial);
  });
  for (std::size_t a = 0; a < runnable.size(); ++a) {
    std::vector<const TrialResult*> mine;
    for (std::size_t i = 0; i < n_trials; ++i) mine.push_back(&results[a * n_trials + i]);
    rep.agents.push_back(summarize(runnable[a], mine));
  }
  apply_normalization(rep.agents);
  if (opts.keep_trials) rep.trials = std::move(results);
  return rep;
}

struct ScalingRow {
  std::size_t library_size = 0;
  double atpo_mean = 0.0;
  double atpo_std = 0.0;
  double vi_mean = 0.0;
  double random_mean = 0.0;
  double normalized = 0.0;
  /// Per-trial normalized ATPO scores in seed order.
  std::vector<double> trial_scores;
  std::vector<TrialResult> atpo_trials;
};

/// ATPO's normalized score as the gridworld library grows. Each K uses the
/// first K tasks of the spec's task list; VI and Random anchors are rerun on
/// the same library and seeds.
inline std::vector<ScalingRow> run_library_scaling(const DomainSpec& base, const std::vector<std::size_t>& sizes,
                                                   std::size_t n_trials, std::uint64_t base_seed,
                                                   const PrepareOptions& prep = {},
                                                   const ExperimentOptions& opts = {}) {
  std::vector<ScalingRow> rows;
  for (std::size_t k : sizes) {
    DomainSpec spec = base;
    spec.library_size = k;
    spec.tasks.clear();
    const PreparedDomain p = prepare_domain(spec, prep);
    ExperimentOptions o = opts;
    o.keep_trials = true;
    auto rep = run_experiment(p, {"atpo", "vi", "random"}, n_trials, base_seed, o);
    ScalingRow row;
    row.library_size = k;
    row.atpo_mean = rep.find("atpo")->mean_return;
    row.atpo_std = rep.find("atpo")->std_return;
    row.vi_mean = rep.find("vi")->mean_return;
    row.random_mean = rep.find("random")->mean_return;
    row.normalized = rep.find("atpo")->normalized;
    for (auto& t : rep.trials)
      if (t.agent == "atpo") {
        row.trial_scores.push_back(normalized_score(t.total_return, row.vi_mean, row.random_mean));
        row.atpo_trials.push_back(std::move(t));
      }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `n` fair coin flips.
inline double sign_test_p(std::size_t wins, std::size_t n) {
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    double log_c = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                   std::lgamma(static_cast<double>(n - k) + 1);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace atpo
