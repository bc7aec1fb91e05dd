#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "atpo/core/pomdp.hpp"
#include "atpo/solvers/alpha_vectors.hpp"

namespace atpo {

/// The hypothesis set M: K models, one solved policy per model, and a prior.
///
/// All models share the ad hoc agent's action and observation spaces; their
/// state spaces may differ.
class ModelLibrary {
 public:
  ModelLibrary() = default;
  ModelLibrary(std::vector<TabularPomdp> models, std::vector<AlphaVectorPolicy> policies,
               std::vector<double> prior = {})
      : models_(std::move(models)), policies_(std::move(policies)), prior_(std::move(prior)) {
    if (models_.empty()) throw ConfigurationError("ModelLibrary: no models");
    if (policies_.size() != models_.size()) throw ConfigurationError("ModelLibrary: one policy per model required");
    if (prior_.empty()) prior_.assign(models_.size(), 1.0 / static_cast<double>(models_.size()));
    if (prior_.size() != models_.size()) throw ConfigurationError("ModelLibrary: prior has wrong length");
    double total = 0.0;
    for (double p : prior_) {
      if (p < 0.0) throw ConfigurationError("ModelLibrary: negative prior entry");
      total += p;
    }
    if (std::abs(total - 1.0) > kStochasticTolerance) throw ConfigurationError("ModelLibrary: prior does not sum to 1");
    for (std::size_t k = 0; k < models_.size(); ++k) {
      const auto& m = models_[k];
      if (m.num_actions() != models_[0].num_actions() || m.num_observations() != models_[0].num_observations())
        throw ConfigurationError("ModelLibrary: model '" + m.label() + "' has a different action or observation space");
      if (policies_[k].num_states() != m.num_states())
        throw ConfigurationError("ModelLibrary: policy for '" + m.label() + "' has the wrong state count");
    }
  }

  std::size_t size() const { return models_.size(); }
  const TabularPomdp& model(std::size_t k) const { return models_.at(k); }
  const AlphaVectorPolicy& policy(std::size_t k) const { return policies_.at(k); }
  const std::vector<TabularPomdp>& models() const { return models_; }
  const std::vector<AlphaVectorPolicy>& policies() const { return policies_; }
  const std::vector<double>& prior() const { return prior_; }
  std::size_t num_actions() const { return models_.front().num_actions(); }
  std::size_t num_observations() const { return models_.front().num_observations(); }

  bool common_state_space() const {
    return std::all_of(models_.begin(), models_.end(),
                       [&](const TabularPomdp& m) { return m.num_states() == models_[0].num_states(); });
  }

  /// max |R[x][a]| over every model.
  double reward_bound() const {
    double r = 0.0;
    for (const auto& m : models_)
      for (double v : m.rewards()) r = std::max(r, std::abs(v));
    return r;
  }

  double max_discount() const {
    double g = 0.0;
    for (const auto& m : models_) g = std::max(g, m.discount());
    return g;
  }

 private:
  std::vector<TabularPomdp> models_;
  std::vector<AlphaVectorPolicy> policies_;
  std::vector<double> prior_;
};

}  // namespace atpo
