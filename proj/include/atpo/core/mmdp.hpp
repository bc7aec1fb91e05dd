#pragma once

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "atpo/core/pomdp.hpp"

namespace atpo {

/// Fully observable multiagent MDP over joint actions.
///
/// Joint actions are numbered lexicographically with agent 0 (the ad hoc
/// agent, by convention) most significant. A single-agent MDP is the N = 1 case.
class TabularMmdp {
 public:
  TabularMmdp() = default;
  TabularMmdp(std::string label, std::size_t num_states, std::vector<std::size_t> agent_action_counts,
              ProbabilityTable transition, std::vector<double> reward, double discount)
      : label_(std::move(label)),
        num_states_(num_states),
        counts_(std::move(agent_action_counts)),
        transition_(std::move(transition)),
        reward_(std::move(reward)),
        discount_(discount) {
    joint_ = std::accumulate(counts_.begin(), counts_.end(), std::size_t{1}, std::multiplies<>());
    if (counts_.empty() || joint_ == 0) throw std::invalid_argument("TabularMmdp: no agents or empty action space");
    if (transition_.blocks() != joint_ || transition_.rows() != num_states_ || transition_.cols() != num_states_)
      throw std::invalid_argument("TabularMmdp: transition table shape mismatch");
    if (reward_.size() != num_states_ * joint_) throw std::invalid_argument("TabularMmdp: reward shape mismatch");
  }

  const std::string& label() const { return label_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_agents() const { return counts_.size(); }
  std::size_t num_joint_actions() const { return joint_; }
  std::size_t agent_actions(std::size_t n) const { return counts_.at(n); }
  const std::vector<std::size_t>& agent_action_counts() const { return counts_; }
  double discount() const { return discount_; }

  ProbabilityTable::RowView transition(Index joint, Index x) const { return transition_.row(joint, x); }
  double reward(Index x, Index joint) const { return reward_[static_cast<std::size_t>(x) * joint_ + joint]; }

  Index joint_index(std::span<const Index> per_agent) const {
    Index j = 0;
    for (std::size_t n = 0; n < counts_.size(); ++n) j = static_cast<Index>(j * counts_[n] + per_agent[n]);
    return j;
  }
  std::vector<Index> decompose(Index joint) const {
    std::vector<Index> out(counts_.size());
    for (std::size_t n = counts_.size(); n-- > 0;) {
      out[n] = static_cast<Index>(joint % counts_[n]);
      joint = static_cast<Index>(joint / counts_[n]);
    }
    return out;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> out;
    for (Index j = 0; j < joint_; ++j)
      for (Index x = 0; x < num_states_; ++x) {
        double mass = 0.0;
        bool negative = false;
        transition(j, x).for_each([&](Index, double p) {
          mass += p;
          negative = negative || p < 0.0;
        });
        if (negative || std::abs(mass - 1.0) > kStochasticTolerance)
          out.push_back("P[" + std::to_string(j) + "][" + std::to_string(x) + "] sums to " + std::to_string(mass));
      }
    return out;
  }

 private:
  std::string label_;
  std::size_t num_states_ = 0;
  std::vector<std::size_t> counts_;
  std::size_t joint_ = 0;
  ProbabilityTable transition_;
  std::vector<double> reward_;
  double discount_ = 0.95;
};

/// The fully observable MDP underlying a POMDP (same T, R, discount).
inline TabularMmdp underlying_mdp(const TabularPomdp& m) {
  std::vector<std::vector<Entry>> rows(m.num_actions() * m.num_states());
  for (Index a = 0; a < m.num_actions(); ++a)
    for (Index x = 0; x < m.num_states(); ++x)
      m.transition(a, x).for_each([&](Index y, double p) { rows[a * m.num_states() + x].push_back({y, p}); });
  std::vector<double> r(m.rewards().begin(), m.rewards().end());
  return TabularMmdp(m.label(), m.num_states(), {m.num_actions()},
                     ProbabilityTable(m.num_actions(), m.num_states(), m.num_states(), std::move(rows), m.layout()),
                     std::move(r), m.discount());
}

/// Folds the policy of agents 1..N-1 into the dynamics, leaving an MDP over
/// agent 0's actions: P(y | x, a) = sum_b pi(b | x) P(y | x, (a, b)).
/// `teammate(x)` returns pi(. | x) over the reduced joint actions of agents 1..N-1.
inline TabularMmdp marginalize_teammates(const TabularMmdp& team,
                                         const std::function<std::vector<Entry>(Index)>& teammate) {
  const std::size_t na = team.agent_actions(0);
  const std::size_t nb = team.num_joint_actions() / na;
  const std::size_t n = team.num_states();
  std::vector<std::vector<Entry>> rows(na * n);
  std::vector<double> reward(n * na, 0.0);
  for (Index x = 0; x < n; ++x) {
    const auto pi = teammate(x);
    for (Index a = 0; a < na; ++a) {
      auto& row = rows[a * n + x];
      for (const Entry& b : pi) {
        const Index joint = static_cast<Index>(a * nb + b.col);
        team.transition(joint, x).for_each([&](Index y, double p) { row.push_back({y, b.prob * p}); });
        reward[x * na + a] += b.prob * team.reward(x, joint);
      }
    }
  }
  return TabularMmdp(team.label(), n, {na},
                     ProbabilityTable(na, n, n, std::move(rows),
                                      n > kDefaultSparseThreshold ? ProbabilityTable::Layout::sparse
                                                                  : ProbabilityTable::Layout::dense),
                     std::move(reward), team.discount());
}

}  // namespace atpo
