#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "atpo/agents/agent.hpp"
#include "atpo/bayes/atpo.hpp"
#include "atpo/bayes/model_library.hpp"
#include "atpo/core/mmdp.hpp"
#include "atpo/solvers/value_iteration.hpp"

namespace atpo {

/// Shared, immutable inputs for building agents over one library.
struct AgentResources {
  std::shared_ptr<const ModelLibrary> library;
  /// Optimal values of each model's induced single-agent MDP (teammate folded in).
  std::shared_ptr<const std::vector<StateValueFunction>> mdp_values;
};

inline std::shared_ptr<const std::vector<StateValueFunction>> solve_induced_mdps(const ModelLibrary& lib,
                                                                                 double tolerance = 1e-6) {
  auto out = std::make_shared<std::vector<StateValueFunction>>();
  for (const auto& m : lib.models()) out->push_back(value_iteration(underlying_mdp(m), {tolerance, 100000}));
  return out;
}

struct AgentOptions {
  AtpoOptions atpo;
  /// BOPA acts on the most probable model instead of sampling the mixture.
  bool bopa_argmax = false;
};

class AtpoAgent final : public Agent {
 public:
  AtpoAgent(std::shared_ptr<const ModelLibrary> lib, AtpoOptions opts = {}) : lib_(std::move(lib)), opts_(opts) {}

  std::string name() const override { return "atpo"; }
  void reset(const EpisodeContext&) override { state_ = PosteriorState::initial(*lib_); }
  Index act(Rng& rng) override { return atpo::act(*lib_, state_, rng, opts_).action; }
  void observe(Index a, Index z, std::optional<Index>) override { update_in_place(*lib_, state_, a, z, opts_); }
  const PosteriorState* posterior() const override { return &state_; }

  const ModelLibrary& library() const { return *lib_; }

 private:
  std::shared_ptr<const ModelLibrary> lib_;
  AtpoOptions opts_;
  PosteriorState state_;
};

/// Knows the true model and plays its solved policy on a single tracked belief.
class InformedPerseusAgent final : public Agent {
 public:
  explicit InformedPerseusAgent(std::shared_ptr<const ModelLibrary> lib) : lib_(std::move(lib)) {}

  std::string name() const override { return "perseus"; }
  Capabilities capabilities() const override { return {.needs_true_model = true}; }

  void reset(const EpisodeContext& ctx) override {
    if (ctx.true_model >= lib_->size()) throw ConfigurationError("perseus agent: true model index not supplied");
    k_ = ctx.true_model;
    belief_ = lib_->model(k_).initial_belief();
  }
  Index act(Rng&) override { return policy_action(lib_->policy(k_), belief_); }
  void observe(Index a, Index z, std::optional<Index>) override {
    const auto& m = lib_->model(k_);
    auto predicted = predict(m, belief_.probs(), a);
    auto corrected = correct(m, predicted, a, z);
    belief_ = corrected.valid ? std::move(corrected.belief) : Belief(std::move(predicted));
  }

  const Belief& belief() const { return belief_; }

 private:
  std::shared_ptr<const ModelLibrary> lib_;
  std::size_t k_ = 0;
  Belief belief_;
};

/// Sees the state and knows the true model; greedy on its induced MDP.
class ValueIterationAgent final : public Agent {
 public:
  ValueIterationAgent(std::shared_ptr<const ModelLibrary> lib,
                      std::shared_ptr<const std::vector<StateValueFunction>> values)
      : lib_(std::move(lib)), values_(std::move(values)) {}

  std::string name() const override { return "vi"; }
  Capabilities capabilities() const override { return {.needs_full_state = true, .needs_true_model = true}; }

  void reset(const EpisodeContext& ctx) override {
    if (ctx.true_model >= lib_->size() || !ctx.state) throw ConfigurationError("vi agent: needs true model and state");
    k_ = ctx.true_model;
    x_ = *ctx.state;
  }
  Index act(Rng&) override { return (*values_)[k_].greedy.at(x_); }
  void observe(Index, Index, std::optional<Index> state) override {
    if (!state) throw ConfigurationError("vi agent: state not supplied");
    x_ = *state;
  }

 private:
  std::shared_ptr<const ModelLibrary> lib_;
  std::shared_ptr<const std::vector<StateValueFunction>> values_;
  std::size_t k_ = 0;
  Index x_ = 0;
};

/// Tracks every model's belief as ATPO does, but each step acts with a model
/// drawn uniformly at random. A model contradicted by an observation keeps its
/// last belief.
class RandomPickerAgent final : public Agent {
 public:
  explicit RandomPickerAgent(std::shared_ptr<const ModelLibrary> lib) : lib_(std::move(lib)) {}

  std::string name() const override { return "random-picker"; }

  void reset(const EpisodeContext&) override {
    beliefs_.clear();
    for (const auto& m : lib_->models()) beliefs_.push_back(m.initial_belief());
    uniform_.assign(lib_->size(), 1.0 / static_cast<double>(lib_->size()));
  }
  Index act(Rng& rng) override {
    last_pick_ = sample_index(uniform_, rng);
    return policy_action(lib_->policy(last_pick_), beliefs_[last_pick_]);
  }
  void observe(Index a, Index z, std::optional<Index>) override {
    for (std::size_t k = 0; k < lib_->size(); ++k) {
      auto r = belief_update(lib_->model(k), beliefs_[k], a, z);
      if (r.valid) beliefs_[k] = std::move(r.belief);
    }
  }

  std::size_t last_pick() const { return last_pick_; }
  const std::vector<Belief>& beliefs() const { return beliefs_; }

 private:
  std::shared_ptr<const ModelLibrary> lib_;
  std::vector<Belief> beliefs_;
  std::vector<double> uniform_;
  std::size_t last_pick_ = 0;
};

/// Full-state Bayesian baseline: p(k) is updated with the transition
/// likelihood P_k(x' | x, a) and the agent acts with the per-model greedy
/// policies of the induced MDPs.
class BopaAgent final : public Agent {
 public:
  BopaAgent(std::shared_ptr<const ModelLibrary> lib, std::shared_ptr<const std::vector<StateValueFunction>> values,
            bool argmax = false)
      : lib_(std::move(lib)), values_(std::move(values)), argmax_(argmax) {
    if (!lib_->common_state_space())
      throw ConfigurationError("bopa: the library's models have different state spaces");
  }

  std::string name() const override { return "bopa"; }
  Capabilities capabilities() const override { return {.needs_full_state = true, .needs_common_state_space = true}; }

  void reset(const EpisodeContext& ctx) override {
    if (!ctx.state) throw ConfigurationError("bopa: state not supplied");
    x_ = *ctx.state;
    posterior_ = lib_->prior();
  }

  Index act(Rng& rng) override {
    if (argmax_) {
      const auto k = static_cast<std::size_t>(std::max_element(posterior_.begin(), posterior_.end()) - posterior_.begin());
      return (*values_)[k].greedy.at(x_);
    }
    std::vector<double> mix(lib_->num_actions(), 0.0);
    for (std::size_t k = 0; k < lib_->size(); ++k) mix[(*values_)[k].greedy.at(x_)] += posterior_[k];
    return static_cast<Index>(sample_index(mix, rng));
  }

  void observe(Index a, Index, std::optional<Index> state) override {
    if (!state) throw ConfigurationError("bopa: state not supplied");
    double total = 0.0;
    for (std::size_t k = 0; k < lib_->size(); ++k) {
      posterior_[k] *= lib_->model(k).transition(a, x_).at(*state);
      total += posterior_[k];
    }
    if (!(total > 0.0)) throw AllModelsPruned("bopa: observed transition is impossible under every model");
    for (double& p : posterior_) p /= total;
    x_ = *state;
  }

  const std::vector<double>& model_posterior() const { return posterior_; }

 private:
  std::shared_ptr<const ModelLibrary> lib_;
  std::shared_ptr<const std::vector<StateValueFunction>> values_;
  bool argmax_;
  Index x_ = 0;
  std::vector<double> posterior_;
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::size_t num_actions) : n_(num_actions) {
    if (n_ == 0) throw ConfigurationError("random agent: no actions");
  }

  std::string name() const override { return "random"; }
  void reset(const EpisodeContext&) override {}
  Index act(Rng& rng) override {
    const auto a = static_cast<Index>(uniform01(rng) * static_cast<double>(n_));
    return std::min<Index>(a, static_cast<Index>(n_ - 1));
  }
  void observe(Index, Index, std::optional<Index>) override {}

 private:
  std::size_t n_;
};

inline const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names{"atpo", "vi", "perseus", "random-picker", "bopa", "random"};
  return names;
}

/// Builds an agent by its CLI name. Computes induced-MDP values on demand when
/// the agent needs them and `res` does not carry them.
inline std::unique_ptr<Agent> make_agent(std::string_view name, const AgentResources& res,
                                         const AgentOptions& opts = {}) {
  if (!res.library) throw ConfigurationError("make_agent: no library");
  auto values = [&] { return res.mdp_values ? res.mdp_values : solve_induced_mdps(*res.library); };
  if (name == "atpo") return std::make_unique<AtpoAgent>(res.library, opts.atpo);
  if (name == "perseus") return std::make_unique<InformedPerseusAgent>(res.library);
  if (name == "random-picker") return std::make_unique<RandomPickerAgent>(res.library);
  if (name == "random") return std::make_unique<RandomAgent>(res.library->num_actions());
  if (name == "vi") return std::make_unique<ValueIterationAgent>(res.library, values());
  if (name == "bopa") {
    if (!res.library->common_state_space())
      throw ConfigurationError("bopa: the library's models have different state spaces");
    return std::make_unique<BopaAgent>(res.library, values(), opts.bopa_argmax);
  }
  throw ConfigurationError("unknown agent '" + std::string(name) + "'");
}

}  // namespace atpo
