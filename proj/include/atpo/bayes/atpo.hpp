#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "atpo/bayes/model_library.hpp"
#include "atpo/core/random.hpp"
#include "atpo/solvers/alpha_vectors.hpp"

namespace atpo {

/// Runtime state of the Bayesian agent: p_t over the K models and one
/// belief per model. Pruned models keep their last belief and have p_t(k) = 0.
struct PosteriorState {
  std::vector<double> posterior;
  std::vector<Belief> beliefs;
  std::vector<char> active;
  std::vector<double> likelihoods;  // per-model evidence from the most recent update
  std::size_t t = 0;

  static PosteriorState initial(const ModelLibrary& lib) {
    PosteriorState s;
    s.posterior = lib.prior();
    s.active.assign(lib.size(), 1);
    s.likelihoods.assign(lib.size(), 1.0);
    for (const auto& m : lib.models()) s.beliefs.push_back(m.initial_belief());
    for (std::size_t k = 0; k < lib.size(); ++k)
      if (s.posterior[k] == 0.0) s.active[k] = 0;
    return s;
  }

  std::size_t num_active() const { return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1)); }

  /// Shannon entropy of p_t in nats.
  double entropy() const {
    double h = 0.0;
    for (double p : posterior)
      if (p > 0.0) h -= p * std::log(p);
    return h;
  }
};

struct AtpoOptions {
  /// Act on the mode of the action mixture instead of sampling from it.
  bool greedy_mixture = false;
  /// When positive, a model whose evidence is zero gets this evidence instead
  /// of being pruned, and its belief is left at the prediction step.
  double likelihood_floor = 0.0;
};

/// pi_t(a) = sum_k p_t(k) [a = greedy action of policy k at b_k].
inline std::vector<double> action_mixture(const ModelLibrary& lib, const PosteriorState& s) {
  std::vector<double> mix(lib.num_actions(), 0.0);
  for (std::size_t k = 0; k < lib.size(); ++k) {
    if (!s.active[k] || s.posterior[k] == 0.0) continue;
    mix[policy_action(lib.policy(k), s.beliefs[k])] += s.posterior[k];
  }
  return mix;
}

struct ActResult {
  Index action;
  std::vector<double> mixture;
};

/// Samples the next action from the mixture (one engine draw), or takes its
/// mode in greedy mode (no draw; lowest action on ties).
inline ActResult act(const ModelLibrary& lib, const PosteriorState& s, Rng& rng, const AtpoOptions& opts = {}) {
  if (s.num_active() == 0) throw AllModelsPruned("act: no active model");
  ActResult r{0, action_mixture(lib, s)};
  if (opts.greedy_mixture) {
    r.action = static_cast<Index>(std::max_element(r.mixture.begin(), r.mixture.end()) - r.mixture.begin());
  } else {
    r.action = static_cast<Index>(sample_index(r.mixture, rng));
  }
  return r;
}

/// Bayes step after executing a and observing z.
///
/// For each active model the evidence is
///   lambda_k = sum_y O_k[a][y][z] sum_x T_k[a][x][y] b_k(x),
/// and p_{t+1}(k) is proportional to p_t(k) lambda_k. The probability the
/// mixture gave to a multiplies every model's joint term equally, so it drops
/// out when normalizing and is not computed. The prediction sum_x b T is
/// shared between the evidence and the belief correction.
inline void update_in_place(const ModelLibrary& lib, PosteriorState& s, Index a, Index z,
                            const AtpoOptions& opts = {}) {
  if (a >= lib.num_actions() || z >= lib.num_observations()) throw std::out_of_range("update: index out of range");
  double total = 0.0;
  for (std::size_t k = 0; k < lib.size(); ++k) {
    if (!s.active[k]) {
      s.likelihoods[k] = 0.0;
      continue;
    }
    const auto& m = lib.model(k);
    auto predicted = predict(m, s.beliefs[k].probs(), a);
    auto corrected = correct(m, predicted, a, z);
    double lambda = corrected.likelihood;
    if (corrected.valid) {
      s.beliefs[k] = std::move(corrected.belief);
    } else if (opts.likelihood_floor > 0.0) {
      lambda = opts.likelihood_floor;
      s.beliefs[k] = Belief(std::move(predicted));
    } else {
      s.active[k] = 0;
      s.posterior[k] = 0.0;
      s.likelihoods[k] = 0.0;
      continue;
    }
    s.likelihoods[k] = lambda;
    s.posterior[k] *= lambda;
    total += s.posterior[k];
  }
  if (!(total > 0.0)) {
    std::fill(s.active.begin(), s.active.end(), 0);
    throw AllModelsPruned("update: observation " + std::to_string(z) + " after action " + std::to_string(a) +
                          " is impossible under every model");
  }
  for (std::size_t k = 0; k < lib.size(); ++k) {
    s.posterior[k] /= total;
    // Underflow can zero a surviving model; treat it as pruned.
    if (s.active[k] && s.posterior[k] == 0.0) s.active[k] = 0;
  }
  ++s.t;
}

inline PosteriorState update(const ModelLibrary& lib, PosteriorState s, Index a, Index z,
                             const AtpoOptions& opts = {}) {
  update_in_place(lib, s, a, z, opts);
  return s;
}

struct StepLoss {
  /// l_t(a | m*): loss of the executed action under the true model's policy and belief.
  double action_loss = 0.0;
  /// L_t(p_t) = sum_k p_t(k) l_t(pi_k | m*).
  double mixture_loss = 0.0;
  /// l_t(pi_k | m*): loss of policy k's greedy action at b_k, for every k.
  std::vector<double> per_model;
};

inline StepLoss step_loss(const ModelLibrary& lib, const PosteriorState& s, Index a, std::size_t true_model) {
  const auto& m = lib.model(true_model);
  const auto losses = loss_all(m, lib.policy(true_model), s.beliefs[true_model]);
  StepLoss out;
  out.action_loss = losses.at(a);
  out.per_model.resize(lib.size());
  for (std::size_t k = 0; k < lib.size(); ++k) {
    out.per_model[k] = losses[policy_action(lib.policy(k), s.beliefs[k])];
    out.mixture_loss += s.posterior[k] * out.per_model[k];
  }
  return out;
}

}  // namespace atpo
