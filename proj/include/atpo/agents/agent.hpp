#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include "atpo/bayes/atpo.hpp"
#include "atpo/core/random.hpp"

namespace atpo {

/// What an agent needs from the harness beyond its own observations.
struct Capabilities {
  bool needs_full_state = false;
  bool needs_true_model = false;
  bool needs_common_state_space = false;
};

inline constexpr std::size_t kUnknownModel = std::numeric_limits<std::size_t>::max();

/// Episode start information. Fields the agent did not ask for are left empty.
struct EpisodeContext {
  std::size_t true_model = kUnknownModel;
  std::optional<Index> state;
};

/// Ad hoc agent controlled by the harness: reset, then alternate act/observe.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual Capabilities capabilities() const { return {}; }
  virtual void reset(const EpisodeContext& ctx) = 0;
  virtual Index act(Rng& rng) = 0;
  /// `state` is the environment state after the step, given only to agents
  /// that declared needs_full_state.
  virtual void observe(Index action, Index observation, std::optional<Index> state) = 0;
  /// Posterior over the library, for agents that keep one.
  virtual const PosteriorState* posterior() const { return nullptr; }
};

}  // namespace atpo
