#pragma once

#include <array>
#include <cstdlib>
#include <deque>
#include <string>
#include <vector>

#include "atpo/core/errors.hpp"
#include "atpo/domains/compile.hpp"
#include "atpo/domains/grid_navigation.hpp"

namespace atpo {

enum class PursuitTeammate { greedy, aware };

/// The two cells around the prey that make up a capture, as (dx, dy) offsets
/// from the prey. Up is -y.
inline const std::array<std::array<std::array<int, 2>, 2>, 4>& capture_configurations() {
  static const std::array<std::array<std::array<int, 2>, 2>, 4> c{{
      {{{0, -1}, {0, 1}}},    // north + south
      {{{-1, 0}, {1, 0}}},    // west + east
      {{{-1, 1}, {1, -1}}},   // southwest + northeast
      {{{-1, -1}, {1, 1}}},   // northwest + southeast
  }};
  return c;
}

/// Predator-prey on a torus, seen from the ad hoc agent: a state holds the
/// teammate's and the prey's offsets from the agent. Index
/// ((tx * H + ty) * W + px) * H + py, then one absorbing done state.
///
/// Moves resolve in order agent, teammate, prey; a move into an occupied cell
/// is blocked. The agent's move fails with probability epsilon and the prey
/// moves uniformly over the five moves.
class PursuitDynamics {
 public:
  struct Pos {
    int x, y;
    bool operator==(const Pos&) const = default;
  };

  PursuitDynamics(int width, int height, int configuration, PursuitTeammate teammate, double epsilon,
                  double discount = 0.95, std::string label = "pursuit")
      : w_(width), h_(height), config_(configuration), mate_(teammate), eps_(epsilon), gamma_(discount),
        label_(std::move(label)) {
    if (w_ < 3 || h_ < 3) throw ConfigurationError("pursuit: torus must be at least 3x3");
    if (config_ < 0 || config_ > 3) throw ConfigurationError("pursuit: capture configuration must be 0..3");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigurationError("pursuit: epsilon must be in [0,1)");
  }

  int width() const { return w_; }
  int height() const { return h_; }
  std::size_t num_states() const { return static_cast<std::size_t>(w_ * h_ * w_ * h_) + 1; }
  std::size_t num_agent_actions() const { return kNumGridMoves; }
  std::size_t num_teammate_actions() const { return kNumGridMoves; }
  std::size_t num_observations() const { return 81; }
  Index done_state() const { return static_cast<Index>(num_states() - 1); }

  Index encode(Pos t, Pos p) const {
    t = wrap(t);
    p = wrap(p);
    return static_cast<Index>(((t.x * h_ + t.y) * w_ + p.x) * h_ + p.y);
  }
  std::pair<Pos, Pos> decode(Index x) const {
    const int py = static_cast<int>(x) % h_;
    int rest = static_cast<int>(x) / h_;
    const int px = rest % w_;
    rest /= w_;
    return {{rest / h_, rest % h_}, {px, py}};
  }

  Pos wrap(Pos p) const { return {((p.x % w_) + w_) % w_, ((p.y % h_) + h_) % h_}; }
  Pos moved(Pos p, Index m) const {
    switch (m) {
      case kUp: return wrap({p.x, p.y - 1});
      case kDown: return wrap({p.x, p.y + 1});
      case kLeft: return wrap({p.x - 1, p.y});
      case kRight: return wrap({p.x + 1, p.y});
      default: return p;
    }
  }
  int torus_distance(Pos a, Pos b) const {
    const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
    return std::min(dx, w_ - dx) + std::min(dy, h_ - dy);
  }
  std::array<Pos, 2> capture_cells(Pos prey) const {
    const auto& c = capture_configurations()[config_];
    return {wrap({prey.x + c[0][0], prey.y + c[0][1]}), wrap({prey.x + c[1][0], prey.y + c[1][1]})};
  }

  bool captured(Index x) const {
    if (x == done_state()) return false;
    auto [t, p] = decode(x);
    const Pos a{0, 0};
    const auto cells = capture_cells(p);
    return (a == cells[0] && t == cells[1]) || (a == cells[1] && t == cells[0]);
  }

  /// Teammate move in agent-centred coordinates.
  Index teammate_move(Pos t, Pos p) const {
    const Pos a{0, 0};
    const auto cells = capture_cells(p);
    if (mate_ == PursuitTeammate::greedy) {
      const int d0 = torus_distance(t, cells[0]), d1 = torus_distance(t, cells[1]);
      const Pos goal = d1 < d0 ? cells[1] : cells[0];
      const int d = std::min(d0, d1);
      if (d == 0) return kStay;
      for (Index m = 0; m < 4; ++m)
        if (torus_distance(moved(t, m), goal) == d - 1) return m;
      return kStay;
    }
    // Aware: take the capture cell the agent is not heading for, and route
    // around the agent and the prey.
    const int a0 = torus_distance(a, cells[0]), a1 = torus_distance(a, cells[1]);
    int pick = 0;
    if (a1 > a0)
      pick = 1;
    else if (a1 == a0 && torus_distance(t, cells[1]) < torus_distance(t, cells[0]))
      pick = 1;
    const Pos goal = cells[pick];
    if (t == goal) return kStay;
    const auto dist = blocked_distances(goal, a, p);
    const int d = dist[goal_index(t)];
    if (d < 0) return kStay;
    for (Index m = 0; m < 4; ++m) {
      const Pos n = moved(t, m);
      if (n == a || n == p) continue;
      if (dist[goal_index(n)] == d - 1) return m;
    }
    return kStay;
  }

  std::vector<Entry> teammate_policy(Index x) const {
    if (x == done_state() || captured(x)) return {{kStay, 1.0}};
    auto [t, p] = decode(x);
    return {{teammate_move(t, p), 1.0}};
  }

  std::vector<Entry> joint_successors(Index x, Index a, Index b) const {
    if (x == done_state() || captured(x)) return {{done_state(), 1.0}};
    auto [t, p] = decode(x);
    std::vector<Entry> out;
    auto resolve = [&](Pos agent_target, double weight) {
      const Pos an = (agent_target == t || agent_target == p) ? Pos{0, 0} : agent_target;
      const Pos tt = moved(t, b);
      const Pos tn = (tt == an || tt == p) ? t : tt;
      for (Index m = 0; m < kNumGridMoves; ++m) {
        const Pos pt = moved(p, m);
        const Pos pn = (pt == an || pt == tn) ? p : pt;
        out.push_back({encode({tn.x - an.x, tn.y - an.y}, {pn.x - an.x, pn.y - an.y}), weight / kNumGridMoves});
      }
    };
    if (a == kStay) {
      resolve({0, 0}, 1.0);
    } else {
      if (eps_ < 1.0) resolve(moved({0, 0}, a), 1.0 - eps_);
      if (eps_ > 0.0) resolve({0, 0}, eps_);
    }
    return out;
  }

  /// Cell id 0..8 of an offset in the 3x3 neighbourhood, or 4 (own cell) when
  /// out of view.
  int cell_id(Pos offset) const {
    int dx = offset.x, dy = offset.y;
    if (dx > w_ / 2) dx -= w_;
    if (dy > h_ / 2) dy -= h_;
    if (std::abs(dx) > 1 || std::abs(dy) > 1) return 4;
    return (dy + 1) * 3 + (dx + 1);
  }

  std::vector<Entry> observation(Index, Index y) const {
    if (y == done_state()) return {{4 * 9 + 4, 1.0}};
    auto [t, p] = decode(y);
    auto one = [&](Pos o) {
      const int id = cell_id(o);
      std::vector<std::pair<int, double>> d;
      if (id == 4) return std::vector<std::pair<int, double>>{{4, 1.0}};
      if (eps_ < 1.0) d.push_back({id, 1.0 - eps_});
      if (eps_ > 0.0) d.push_back({4, eps_});
      return d;
    };
    std::vector<Entry> out;
    for (auto [it, pt] : one(t))
      for (auto [ip, pp] : one(p)) out.push_back({static_cast<Index>(it * 9 + ip), pt * pp});
    return out;
  }

  double reward(Index x, Index) const {
    if (x == done_state()) return 0.0;
    return captured(x) ? 100.0 : -1.0;
  }

  /// Uniform over states where the three occupy distinct cells and the prey
  /// is not already captured.
  Belief initial_belief() const {
    std::vector<Index> support;
    for (Index x = 0; x < done_state(); ++x) {
      auto [t, p] = decode(x);
      const Pos a{0, 0};
      if (t == a || p == a || t == p || captured(x)) continue;
      support.push_back(x);
    }
    return Belief::uniform_over(num_states(), support);
  }

  std::string label() const { return label_; }
  double discount() const { return gamma_; }

 private:
  int goal_index(Pos p) const { return p.x * h_ + p.y; }

  /// BFS distances to `goal` on the torus, treating `a` and `p` as obstacles.
  /// -1 marks unreachable cells.
  std::vector<int> blocked_distances(Pos goal, Pos a, Pos p) const {
    std::vector<int> d(static_cast<std::size_t>(w_ * h_), -1);
    d[goal_index(goal)] = 0;
    std::deque<Pos> q{goal};
    while (!q.empty()) {
      const Pos v = q.front();
      q.pop_front();
      for (Index m = 0; m < 4; ++m) {
        const Pos n = moved(v, m);
        if (n == a || n == p || d[goal_index(n)] >= 0) continue;
        d[goal_index(n)] = d[goal_index(v)] + 1;
        q.push_back(n);
      }
    }
    return d;
  }

  int w_, h_;
  int config_;
  PursuitTeammate mate_;
  double eps_;
  double gamma_;
  std::string label_;
};

}  // namespace atpo
