#pragma once

#include <concepts>
#include <string>
#include <vector>

#include "atpo/core/mmdp.hpp"
#include "atpo/core/pomdp.hpp"

namespace atpo {

/// A two-agent domain described by its rules. The teammate's policy is given
/// explicitly so the same rules yield both the ad hoc agent's POMDP (teammate
/// folded into T) and the joint MMDP.
template <class D>
concept Dynamics = requires(const D& d, Index x, Index a, Index b) {
  { d.num_states() } -> std::convertible_to<std::size_t>;
  { d.num_agent_actions() } -> std::convertible_to<std::size_t>;
  { d.num_teammate_actions() } -> std::convertible_to<std::size_t>;
  { d.num_observations() } -> std::convertible_to<std::size_t>;
  { d.joint_successors(x, a, b) } -> std::convertible_to<std::vector<Entry>>;
  { d.teammate_policy(x) } -> std::convertible_to<std::vector<Entry>>;
  { d.observation(a, x) } -> std::convertible_to<std::vector<Entry>>;
  { d.reward(x, a) } -> std::convertible_to<double>;
  { d.initial_belief() } -> std::convertible_to<Belief>;
  { d.label() } -> std::convertible_to<std::string>;
  { d.discount() } -> std::convertible_to<double>;
};

template <Dynamics D>
TabularPomdp compile_pomdp(const D& d, std::size_t sparse_threshold = kDefaultSparseThreshold) {
  const std::size_t n = d.num_states();
  PomdpBuilder b(n, d.num_agent_actions(), d.num_observations());
  b.label(d.label()).discount(d.discount()).initial_belief(d.initial_belief());
  for (Index x = 0; x < n; ++x) {
    const auto pi = d.teammate_policy(x);
    for (Index a = 0; a < d.num_agent_actions(); ++a) {
      for (const Entry& mate : pi)
        for (const Entry& e : d.joint_successors(x, a, mate.col)) b.add_transition(a, x, e.col, mate.prob * e.prob);
      b.set_reward(x, a, d.reward(x, a));
    }
  }
  for (Index a = 0; a < d.num_agent_actions(); ++a)
    for (Index y = 0; y < n; ++y)
      for (const Entry& e : d.observation(a, y)) b.add_observation(a, y, e.col, e.prob);
  return std::move(b).build(sparse_threshold);
}

/// The joint two-agent MMDP. Agent 0 is the ad hoc agent; the reward does
/// not depend on the teammate's action.
template <Dynamics D>
TabularMmdp compile_mmdp(const D& d) {
  const std::size_t n = d.num_states();
  const std::size_t na = d.num_agent_actions();
  const std::size_t nb = d.num_teammate_actions();
  std::vector<std::vector<Entry>> rows(na * nb * n);
  std::vector<double> reward(n * na * nb);
  for (Index a = 0; a < na; ++a)
    for (Index mate = 0; mate < nb; ++mate) {
      const Index j = static_cast<Index>(a * nb + mate);
      for (Index x = 0; x < n; ++x) {
        rows[j * n + x] = d.joint_successors(x, a, mate);
        reward[x * na * nb + j] = d.reward(x, a);
      }
    }
  const auto layout = n > kDefaultSparseThreshold ? ProbabilityTable::Layout::sparse : ProbabilityTable::Layout::dense;
  return TabularMmdp(d.label(), n, {na, nb}, ProbabilityTable(na * nb, n, n, std::move(rows), layout),
                     std::move(reward), d.discount());
}

/// Distribution over the 3^k observation codes produced when each present
/// element of `cells` (nonzero category) is independently missed with
/// probability eps and reported as 0. Codes are base-3 with cells[0] most
/// significant.
inline std::vector<Entry> noisy_categorical_observation(const std::vector<int>& cells, double eps) {
  std::vector<Entry> out{{0, 1.0}};
  for (int c : cells) {
    std::vector<Entry> next;
    for (const Entry& e : out) {
      const Index base = e.col * 3;
      if (c == 0) {
        next.push_back({base, e.prob});
        continue;
      }
      if (eps < 1.0) next.push_back({base + static_cast<Index>(c), e.prob * (1.0 - eps)});
      if (eps > 0.0) next.push_back({base, e.prob * eps});
    }
    out.swap(next);
  }
  return out;
}

}  // namespace atpo
