#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "atpo/core/errors.hpp"
#include "atpo/core/probability_table.hpp"
#include "atpo/core/random.hpp"

namespace atpo {

/// Tolerance for every stochasticity check in the library.
inline constexpr double kStochasticTolerance = 1e-9;

/// Models with more states than this store their rows sparse.
inline constexpr std::size_t kDefaultSparseThreshold = 64;

/// Probability vector over the states of one model.
class Belief {
 public:
  Belief() = default;
  explicit Belief(std::vector<double> probs) : p_(std::move(probs)) {}

  static Belief uniform(std::size_t n) { return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n))); }
  static Belief point(std::size_t n, Index x) {
    std::vector<double> p(n, 0.0);
    p.at(x) = 1.0;
    return Belief(std::move(p));
  }
  /// Uniform over the listed states.
  static Belief uniform_over(std::size_t n, std::span<const Index> support) {
    std::vector<double> p(n, 0.0);
    for (Index x : support) p.at(x) = 1.0 / static_cast<double>(support.size());
    return Belief(std::move(p));
  }

  std::size_t size() const { return p_.size(); }
  bool empty() const { return p_.empty(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }
  const std::vector<double>& vector() const { return p_; }

  double sum() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

  bool is_valid(double tol = kStochasticTolerance) const {
    if (p_.empty()) return false;
    for (double v : p_)
      if (!(v >= 0.0)) return false;
    return std::abs(sum() - 1.0) <= tol;
  }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> p_;
};

/// Alternating (action, observation) record a_0, z_1, a_1, z_2, ...
class History {
 public:
  void push_action(Index a) {
    if (awaiting_observation_) throw std::logic_error("History: two actions in a row");
    steps_.push_back({a, 0});
    awaiting_observation_ = true;
  }
  void push_observation(Index z) {
    if (!awaiting_observation_) throw std::logic_error("History: observation without a preceding action");
    steps_.back().second = z;
    awaiting_observation_ = false;
  }
  void push(Index a, Index z) {
    push_action(a);
    push_observation(z);
  }
  /// Completed (action, observation) pairs.
  std::size_t length() const { return awaiting_observation_ ? steps_.size() - 1 : steps_.size(); }
  Index action(std::size_t t) const { return steps_.at(t).first; }
  Index observation(std::size_t t) const { return steps_.at(t).second; }
  bool awaiting_observation() const { return awaiting_observation_; }

 private:
  std::vector<std::pair<Index, Index>> steps_;
  bool awaiting_observation_ = false;
};

/// One task/teammate hypothesis as seen by the ad hoc agent.
///
/// transition(a, x) is the row T[a][x][.] with the teammate policy already
/// marginalized in; observation(a, y) is O[a][y][.], indexed by the state
/// the agent arrived in after acting a; reward(x, a) is R[x][a].
class TabularPomdp {
 public:
  TabularPomdp() = default;
  TabularPomdp(std::string label, std::size_t num_states, std::size_t num_actions, std::size_t num_observations,
               ProbabilityTable transition, ProbabilityTable observation, std::vector<double> reward,
               double discount, Belief initial_belief)
      : label_(std::move(label)),
        num_states_(num_states),
        num_actions_(num_actions),
        num_observations_(num_observations),
        transition_(std::move(transition)),
        observation_(std::move(observation)),
        reward_(std::move(reward)),
        discount_(discount),
        initial_(std::move(initial_belief)) {
    if (num_states_ == 0 || num_actions_ == 0 || num_observations_ == 0)
      throw std::invalid_argument("TabularPomdp: empty state, action or observation space");
    if (transition_.blocks() != num_actions_ || transition_.rows() != num_states_ || transition_.cols() != num_states_)
      throw std::invalid_argument("TabularPomdp: transition table shape mismatch");
    if (observation_.blocks() != num_actions_ || observation_.rows() != num_states_ ||
        observation_.cols() != num_observations_)
      throw std::invalid_argument("TabularPomdp: observation table shape mismatch");
    if (reward_.size() != num_states_ * num_actions_)
      throw std::invalid_argument("TabularPomdp: reward table shape mismatch");
  }

  const std::string& label() const { return label_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_observations() const { return num_observations_; }
  double discount() const { return discount_; }
  const Belief& initial_belief() const { return initial_; }

  ProbabilityTable::RowView transition(Index a, Index x) const { return transition_.row(a, x); }
  ProbabilityTable::RowView observation(Index a, Index y) const { return observation_.row(a, y); }
  double reward(Index x, Index a) const { return reward_[static_cast<std::size_t>(x) * num_actions_ + a]; }
  std::span<const double> rewards() const { return reward_; }
  ProbabilityTable::Layout layout() const { return transition_.layout(); }

  /// FNV-1a over every table entry; identifies a model's content for caching.
  std::uint64_t content_hash() const {
    std::uint64_t h = fnv1a(label_);
    auto mix_u = [&](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ULL;
      }
    };
    auto mix_d = [&](double d) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof bits);
      mix_u(bits);
    };
    mix_u(num_states_);
    mix_u(num_actions_);
    mix_u(num_observations_);
    mix_d(discount_);
    for (Index a = 0; a < num_actions_; ++a)
      for (Index x = 0; x < num_states_; ++x) {
        transition(a, x).for_each([&](Index y, double p) {
          mix_u(y);
          mix_d(p);
        });
        mix_u(0xfffffffffULL);
        observation(a, x).for_each([&](Index z, double p) {
          mix_u(z);
          mix_d(p);
        });
        mix_u(0xeeeeeeeeeULL);
      }
    for (double r : reward_) mix_d(r);
    for (double b : initial_.probs()) mix_d(b);
    return h;
  }

 private:
  std::string label_;
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::size_t num_observations_ = 0;
  ProbabilityTable transition_;
  ProbabilityTable observation_;
  std::vector<double> reward_;
  double discount_ = 0.95;
  Belief initial_;
};

/// Accumulates sparse triples and emits an immutable TabularPomdp.
class PomdpBuilder {
 public:
  PomdpBuilder(std::size_t num_states, std::size_t num_actions, std::size_t num_observations)
      : states_(num_states),
        actions_(num_actions),
        observations_(num_observations),
        t_rows_(num_states * num_actions),
        o_rows_(num_states * num_actions),
        reward_(num_states * num_actions, 0.0) {}

  PomdpBuilder& label(std::string l) {
    label_ = std::move(l);
    return *this;
  }
  PomdpBuilder& discount(double g) {
    discount_ = g;
    return *this;
  }
  PomdpBuilder& initial_belief(Belief b) {
    initial_ = std::move(b);
    return *this;
  }
  void add_transition(Index a, Index x, Index y, double p) { t_rows_.at(flat(a, x)).push_back({y, p}); }
  void add_observation(Index a, Index y, Index z, double p) { o_rows_.at(flat(a, y)).push_back({z, p}); }
  void set_reward(Index x, Index a, double r) { reward_.at(static_cast<std::size_t>(x) * actions_ + a) = r; }

  std::size_t num_states() const { return states_; }
  std::size_t num_actions() const { return actions_; }
  std::size_t num_observations() const { return observations_; }

  TabularPomdp build(std::size_t sparse_threshold = kDefaultSparseThreshold) && {
    const auto layout =
        states_ > sparse_threshold ? ProbabilityTable::Layout::sparse : ProbabilityTable::Layout::dense;
    ProbabilityTable t(actions_, states_, states_, std::move(t_rows_), layout);
    ProbabilityTable o(actions_, states_, observations_, std::move(o_rows_), layout);
    Belief b0 = initial_.empty() ? Belief::uniform(states_) : std::move(initial_);
    return TabularPomdp(std::move(label_), states_, actions_, observations_, std::move(t), std::move(o),
                        std::move(reward_), discount_, std::move(b0));
  }

 private:
  std::size_t flat(Index a, Index x) const { return static_cast<std::size_t>(a) * states_ + x; }

  std::size_t states_, actions_, observations_;
  std::vector<std::vector<Entry>> t_rows_;
  std::vector<std::vector<Entry>> o_rows_;
  std::vector<double> reward_;
  std::string label_;
  double discount_ = 0.95;
  Belief initial_;
};

// ---------------------------------------------------------------------------
// Filtering

/// Result of one Bayes filter step. `likelihood` is the pre-normalization mass
/// rho = P(z | b, a); when it is zero the belief is left empty and `valid` is false.
struct BeliefUpdate {
  Belief belief;
  double likelihood = 0.0;
  bool valid = false;
};

/// Predicted successor distribution: sum_x b(x) T[a][x][.]
inline std::vector<double> predict(const TabularPomdp& m, std::span<const double> b, Index a) {
  std::vector<double> out(m.num_states(), 0.0);
  for (Index x = 0; x < b.size(); ++x) {
    const double bx = b[x];
    if (bx == 0.0) continue;
    m.transition(a, x).for_each([&](Index y, double p) { out[y] += bx * p; });
  }
  return out;
}

/// Weights a predicted distribution by O[a][.][z] and normalizes.
inline BeliefUpdate correct(const TabularPomdp& m, std::span<const double> predicted, Index a, Index z) {
  std::vector<double> out(predicted.size(), 0.0);
  double rho = 0.0;
  for (Index y = 0; y < predicted.size(); ++y) {
    if (predicted[y] == 0.0) continue;
    const double w = predicted[y] * m.observation(a, y).at(z);
    out[y] = w;
    rho += w;
  }
  BeliefUpdate r;
  r.likelihood = rho;
  if (rho > 0.0) {
    for (double& v : out) v /= rho;
    r.belief = Belief(std::move(out));
    r.valid = true;
  }
  return r;
}

/// b'(y) ∝ sum_x b(x) T[a][x][y] O[a][y][z]
inline BeliefUpdate belief_update(const TabularPomdp& m, const Belief& b, Index a, Index z) {
  if (b.size() != m.num_states()) throw std::invalid_argument("belief_update: belief size does not match model");
  if (a >= m.num_actions() || z >= m.num_observations()) throw std::out_of_range("belief_update: index out of range");
  return correct(m, predict(m, b.probs(), a), a, z);
}

/// Same as belief_update but raises ZeroLikelihood instead of flagging.
inline Belief belief_update_or_throw(const TabularPomdp& m, const Belief& b, Index a, Index z) {
  auto r = belief_update(m, b, a, z);
  if (!r.valid)
    throw ZeroLikelihood("observation " + std::to_string(z) + " impossible under model '" + m.label() + "'");
  return std::move(r.belief);
}

/// P(z | b, a) for every z.
inline std::vector<double> observation_distribution(const TabularPomdp& m, const Belief& b, Index a) {
  std::vector<double> dist(m.num_observations(), 0.0);
  auto pred = predict(m, b.probs(), a);
  for (Index y = 0; y < pred.size(); ++y) {
    if (pred[y] == 0.0) continue;
    m.observation(a, y).for_each([&](Index z, double p) { dist[z] += pred[y] * p; });
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { transition_row, observation_row, negative_entry, initial_belief, discount } kind;
  Index action = 0;
  Index row = 0;
  double mass = 0.0;
  std::string message;
};

inline std::vector<Violation> validate(const TabularPomdp& m) {
  std::vector<Violation> out;
  auto check_rows = [&](bool transitions) {
    const char* what = transitions ? "T" : "O";
    for (Index a = 0; a < m.num_actions(); ++a)
      for (Index x = 0; x < m.num_states(); ++x) {
        auto row = transitions ? m.transition(a, x) : m.observation(a, x);
        double mass = 0.0;
        bool negative = false;
        double worst = 0.0;
        row.for_each([&](Index, double p) {
          mass += p;
          if (p < 0.0) {
            negative = true;
            worst = std::min(worst, p);
          }
        });
        std::ostringstream msg;
        if (negative) {
          msg << what << "[" << a << "][" << x << "] has negative entry " << worst;
          out.push_back({Violation::Kind::negative_entry, a, x, mass, msg.str()});
        } else if (std::abs(mass - 1.0) > kStochasticTolerance) {
          msg << what << "[" << a << "][" << x << "] sums to " << mass;
          out.push_back({transitions ? Violation::Kind::transition_row : Violation::Kind::observation_row, a, x,
                         mass, msg.str()});
        }
      }
  };
  check_rows(true);
  check_rows(false);
  const Belief& b0 = m.initial_belief();
  if (b0.size() != m.num_states() || !b0.is_valid()) {
    std::ostringstream msg;
    msg << "initial belief has size " << b0.size() << " and mass " << b0.sum();
    out.push_back({Violation::Kind::initial_belief, 0, 0, b0.sum(), msg.str()});
  }
  if (!(m.discount() >= 0.0 && m.discount() < 1.0)) {
    out.push_back({Violation::Kind::discount, 0, 0, m.discount(),
                   "discount " + std::to_string(m.discount()) + " outside [0,1)"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

struct StepSample {
  Index next_state;
  Index observation;
  double reward;
};

/// Draws one value from a table row. Consumes exactly one engine draw.
inline Index sample_row(const ProbabilityTable::RowView& row, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  Index chosen = 0;
  bool found = false;
  Index last = 0;
  row.for_each([&](Index c, double p) {
    if (found || p <= 0.0) return;
    acc += p;
    last = c;
    if (u < acc) {
      chosen = c;
      found = true;
    }
  });
  return found ? chosen : last;
}

inline Index sample_belief(const Belief& b, Rng& rng) { return static_cast<Index>(sample_index(b.probs(), rng)); }

/// x' ~ T[a][x][.], z ~ O[a][x'][.], r = R[x][a]. Always two engine draws.
inline StepSample simulate_step(const TabularPomdp& m, Index x, Index a, Rng& rng) {
  const Index y = sample_row(m.transition(a, x), rng);
  const Index z = sample_row(m.observation(a, y), rng);
  return {y, z, m.reward(x, a)};
}

}  // namespace atpo
