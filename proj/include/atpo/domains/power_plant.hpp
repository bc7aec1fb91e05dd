#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "atpo/core/errors.hpp"
#include "atpo/domains/compile.hpp"

namespace atpo {

/// Six rooms connected as 0-2, 0-4, 0-5, 1-2, 1-3.
class PowerPlantGraph {
 public:
  static constexpr int kRooms = 6;

  PowerPlantGraph() {
    const std::array<std::array<int, 2>, 5> edges{{{0, 2}, {0, 4}, {0, 5}, {1, 2}, {1, 3}}};
    for (auto [a, b] : edges) {
      adj_[a].push_back(b);
      adj_[b].push_back(a);
    }
    for (auto& n : adj_) std::sort(n.begin(), n.end());
    for (int s = 0; s < kRooms; ++s) {
      dist_[s].fill(-1);
      dist_[s][s] = 0;
      std::deque<int> q{s};
      while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int n : adj_[v])
          if (dist_[s][n] < 0) {
            dist_[s][n] = dist_[s][v] + 1;
            q.push_back(n);
          }
      }
    }
  }

  const std::vector<int>& neighbors(int room) const { return adj_[room]; }
  int distance(int a, int b) const { return dist_[a][b]; }

  /// Room reached by "move to the k-th lowest-index neighbour"; k >= degree stays.
  int move(int room, int k) const { return k < static_cast<int>(adj_[room].size()) ? adj_[room][k] : room; }

 private:
  std::array<std::vector<int>, kRooms> adj_;
  std::array<std::array<int, kRooms>, kRooms> dist_{};
};

enum class PowerPlantTask { exploration, cleanup };

/// Robot actions: three moves (k-th lowest neighbour), Stay, query the human
/// for the human's room, query the human for the robot's own room.
enum PowerPlantAction : Index { kMove0 = 0, kMove1 = 1, kMove2 = 2, kPlantStay = 3, kQueryHuman = 4, kQueryOwn = 5 };

/// Robot and human in the plant. Exploration flags rooms {1, 2, 4} as
/// explored when either of them stands in one after a move; cleanup flags
/// rooms {3, 5} clean only when the human stands in them. The human walks
/// greedily to the nearest pending room (lowest room on ties, first sorted
/// neighbour along a shortest path) and stays once none is pending.
///
/// The state space is the set of (robot, human, flags) tuples reachable from
/// any starting pair with nothing done, in lexicographic order, plus one
/// absorbing state. Observation 0 stands for both "room 0" and "no answer".
class PowerPlantDynamics {
 public:
  PowerPlantDynamics(PowerPlantTask task, double epsilon, double discount = 0.95)
      : task_(task), eps_(epsilon), gamma_(discount) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigurationError("power plant: epsilon must be in [0,1)");
    targets_ = task == PowerPlantTask::exploration ? std::vector<int>{1, 2, 4} : std::vector<int>{3, 5};
    enumerate();
  }

  struct Tuple {
    int robot, human, flags;
    auto operator<=>(const Tuple&) const = default;
  };

  PowerPlantTask task() const { return task_; }
  const std::vector<int>& targets() const { return targets_; }
  const PowerPlantGraph& graph() const { return graph_; }
  std::size_t num_states() const { return states_.size() + 1; }
  std::size_t num_agent_actions() const { return 6; }
  std::size_t num_teammate_actions() const { return 4; }
  std::size_t num_observations() const { return PowerPlantGraph::kRooms; }
  Index absorbing_state() const { return static_cast<Index>(states_.size()); }
  int all_flags() const { return (1 << targets_.size()) - 1; }

  const Tuple& tuple(Index x) const { return states_.at(x); }
  Index index_of(const Tuple& t) const {
    auto it = index_.find(t);
    if (it == index_.end()) throw std::out_of_range("power plant: unreachable tuple");
    return it->second;
  }
  bool all_done(Index x) const { return x != absorbing_state() && states_[x].flags == all_flags(); }

  /// Human's move as an action index (k-th neighbour, or 3 for Stay).
  Index human_move(int human, int flags) const {
    int best = -1, bd = 1 << 20;
    for (std::size_t i = 0; i < targets_.size(); ++i)
      if (!(flags >> i & 1) && graph_.distance(human, targets_[i]) < bd) {
        bd = graph_.distance(human, targets_[i]);
        best = targets_[i];
      }
    if (best < 0 || best == human) return 3;
    const auto& n = graph_.neighbors(human);
    for (std::size_t k = 0; k < n.size(); ++k)
      if (graph_.distance(n[k], best) == bd - 1) return static_cast<Index>(k);
    return 3;
  }

  int robot_after(int robot, Index a) const { return a < 3 ? graph_.move(robot, static_cast<int>(a)) : robot; }
  int human_after(int human, Index b) const { return b < 3 ? graph_.move(human, static_cast<int>(b)) : human; }

  int flags_after(int flags, int robot, int human) const {
    for (std::size_t i = 0; i < targets_.size(); ++i) {
      const int room = targets_[i];
      const bool hit = task_ == PowerPlantTask::exploration ? (robot == room || human == room) : human == room;
      if (hit) flags |= 1 << i;
    }
    return flags;
  }

  std::vector<Entry> teammate_policy(Index x) const {
    if (x == absorbing_state() || all_done(x)) return {{3, 1.0}};
    return {{human_move(states_[x].human, states_[x].flags), 1.0}};
  }

  std::vector<Entry> joint_successors(Index x, Index a, Index b) const {
    if (x == absorbing_state() || all_done(x)) return {{absorbing_state(), 1.0}};
    const auto& s = states_[x];
    const int r = robot_after(s.robot, a);
    int h = human_after(s.human, b);
    // The state space only holds what the greedy human can reach. In the
    // joint model, a human move that would leave it is replaced by the
    // greedy one.
    if (!index_.count({r, h, flags_after(s.flags, r, h)})) h = human_after(s.human, human_move(s.human, s.flags));
    return {{index_of({r, h, flags_after(s.flags, r, h)}), 1.0}};
  }

  std::vector<Entry> observation(Index a, Index y) const {
    if (y == absorbing_state()) return {{0, 1.0}};
    const auto& s = states_[y];
    const int room = a == kQueryHuman ? s.human : s.robot;
    if (room == 0 || eps_ == 0.0) return {{static_cast<Index>(room), 1.0}};
    return {{static_cast<Index>(room), 1.0 - eps_}, {0, eps_}};
  }

  double reward(Index x, Index) const {
    if (x == absorbing_state()) return 0.0;
    return all_done(x) ? 100.0 : -1.0;
  }

  /// Uniform over the 36 starting (robot, human) pairs with nothing done.
  Belief initial_belief() const {
    std::vector<Index> support;
    for (int r = 0; r < PowerPlantGraph::kRooms; ++r)
      for (int h = 0; h < PowerPlantGraph::kRooms; ++h) support.push_back(index_of({r, h, 0}));
    return Belief::uniform_over(num_states(), support);
  }

  std::string label() const {
    return task_ == PowerPlantTask::exploration ? "power-plant/exploration" : "power-plant/cleanup";
  }
  double discount() const { return gamma_; }

 private:
  void enumerate() {
    std::set<Tuple> seen;
    std::deque<Tuple> q;
    auto push = [&](Tuple t) {
      if (seen.insert(t).second) q.push_back(t);
    };
    for (int r = 0; r < PowerPlantGraph::kRooms; ++r)
      for (int h = 0; h < PowerPlantGraph::kRooms; ++h) push({r, h, 0});
    while (!q.empty()) {
      const Tuple t = q.front();
      q.pop_front();
      if (t.flags == all_flags()) continue;
      const int h = human_after(t.human, human_move(t.human, t.flags));
      for (Index a = 0; a < 4; ++a) {
        const int r = robot_after(t.robot, a);
        push({r, h, flags_after(t.flags, r, h)});
      }
    }
    states_.assign(seen.begin(), seen.end());
    for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = static_cast<Index>(i);
  }

  PowerPlantTask task_;
  double eps_;
  double gamma_;
  PowerPlantGraph graph_;
  std::vector<int> targets_;
  std::vector<Tuple> states_;
  std::map<Tuple, Index> index_;
};

}  // namespace atpo
