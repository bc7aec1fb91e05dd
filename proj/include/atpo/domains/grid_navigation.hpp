#pragma once

#include <array>
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "atpo/core/errors.hpp"
#include "atpo/domains/compile.hpp"

namespace atpo {

/// Actions shared by every grid domain. Up decreases the row.
enum GridMove : Index { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
inline constexpr std::size_t kNumGridMoves = 5;

/// Observation categories for one neighbouring cell.
enum GridSighting : int { kNothing = 0, kTeammate = 1, kWall = 2 };
inline constexpr std::size_t kNumGridObservations = 81;

/// A rectangular grid with optional walls. Cells are numbered c * height + r.
class GridLayout {
 public:
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  GridLayout() = default;
  GridLayout(int width, int height) : GridLayout(width, height, std::vector<char>(width * height, 1)) {}
  GridLayout(int width, int height, std::vector<char> free) : w_(width), h_(height), free_(std::move(free)) {
    if (w_ < 1 || h_ < 1) throw ConfigurationError("grid: dimensions must be positive");
    if (free_.size() != static_cast<std::size_t>(w_ * h_)) throw ConfigurationError("grid: wall mask has wrong size");
  }

  int width() const { return w_; }
  int height() const { return h_; }
  int num_cells() const { return w_ * h_; }
  int cell(int c, int r) const { return c * h_ + r; }
  int column(int cell) const { return cell / h_; }
  int row(int cell) const { return cell % h_; }
  bool is_free(int cell) const { return free_[cell] != 0; }

  std::vector<int> free_cells() const {
    std::vector<int> out;
    for (int i = 0; i < num_cells(); ++i)
      if (is_free(i)) out.push_back(i);
    return out;
  }

  /// Cell reached by `move`, or -1 when it leaves the grid or hits a wall.
  int step(int from, Index move) const {
    int c = column(from), r = row(from);
    switch (move) {
      case kUp: --r; break;
      case kDown: ++r; break;
      case kLeft: --c; break;
      case kRight: ++c; break;
      default: return from;
    }
    if (c < 0 || r < 0 || c >= w_ || r >= h_) return -1;
    const int to = cell(c, r);
    return is_free(to) ? to : -1;
  }

  /// BFS distances over free cells.
  std::vector<int> distances_from(int source) const {
    std::vector<int> d(num_cells(), kUnreachable);
    d[source] = 0;
    std::deque<int> q{source};
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (Index m = 0; m < 4; ++m) {
        const int n = step(v, m);
        if (n >= 0 && d[n] == kUnreachable) {
          d[n] = d[v] + 1;
          q.push_back(n);
        }
      }
    }
    return d;
  }

 private:
  int w_ = 0, h_ = 0;
  std::vector<char> free_;
};

/// Shortest-path teammate: heads for whichever goal is nearest (lowest goal
/// index on ties) and takes the first of Up, Down, Left, Right that shortens
/// the distance. Stays once on a goal or when no goal is reachable.
class ShortestPathTeammate {
 public:
  ShortestPathTeammate() = default;
  ShortestPathTeammate(const GridLayout& layout, const std::vector<int>& goals) : layout_(&layout), goals_(goals) {
    for (int g : goals) dist_.push_back(layout.distances_from(g));
  }

  Index move(int from) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < goals_.size(); ++i)
      if (dist_[i][from] < dist_[best][from]) best = i;
    const int d = dist_[best][from];
    if (d == 0 || d == GridLayout::kUnreachable) return kStay;
    for (Index m = 0; m < 4; ++m) {
      const int n = layout_->step(from, m);
      if (n >= 0 && dist_[best][n] == d - 1) return m;
    }
    return kStay;
  }

 private:
  const GridLayout* layout_ = nullptr;
  std::vector<int> goals_;
  std::vector<std::vector<int>> dist_;
};

/// What the ad hoc agent at `self` sees above, below, left and right.
inline std::vector<int> grid_sightings(const GridLayout& layout, int self, int teammate) {
  std::vector<int> cats(4, kNothing);
  for (Index m = 0; m < 4; ++m) {
    const int n = layout.step(self, m);
    if (n < 0)
      cats[m] = kWall;
    else if (n == teammate)
      cats[m] = kTeammate;
  }
  return cats;
}

/// Two agents in an open grid, each needing to stand on one of two goal cells.
/// Agents may share a cell. States are (agent cell, teammate cell) pairs with
/// index agent * cells + teammate, followed by one absorbing done state.
class GridworldDynamics {
 public:
  GridworldDynamics(int width, int height, std::array<int, 2> goals, double epsilon, double discount = 0.95,
                    std::string label = "gridworld")
      : layout_(width, height), goals_(goals), eps_(epsilon), gamma_(discount), label_(std::move(label)) {
    if (goals[0] == goals[1]) throw ConfigurationError("gridworld: goals must differ");
    for (int g : goals)
      if (g < 0 || g >= layout_.num_cells()) throw ConfigurationError("gridworld: goal outside grid");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigurationError("gridworld: epsilon must be in [0,1)");
    mate_ = ShortestPathTeammate(layout_, {goals[0], goals[1]});
  }
  GridworldDynamics(const GridworldDynamics& o)
      : layout_(o.layout_), goals_(o.goals_), eps_(o.eps_), gamma_(o.gamma_), label_(o.label_),
        mate_(layout_, {goals_[0], goals_[1]}) {}
  GridworldDynamics& operator=(const GridworldDynamics&) = delete;

  const GridLayout& layout() const { return layout_; }
  std::size_t num_cells() const { return static_cast<std::size_t>(layout_.num_cells()); }
  std::size_t num_states() const { return num_cells() * num_cells() + 1; }
  std::size_t num_agent_actions() const { return kNumGridMoves; }
  std::size_t num_teammate_actions() const { return kNumGridMoves; }
  std::size_t num_observations() const { return kNumGridObservations; }
  Index done_state() const { return static_cast<Index>(num_cells() * num_cells()); }
  Index encode(int agent, int teammate) const { return static_cast<Index>(agent * layout_.num_cells() + teammate); }
  std::pair<int, int> decode(Index x) const {
    return {static_cast<int>(x / num_cells()), static_cast<int>(x % num_cells())};
  }
  bool at_goals(Index x) const {
    if (x == done_state()) return false;
    auto [p, t] = decode(x);
    return (p == goals_[0] && t == goals_[1]) || (p == goals_[1] && t == goals_[0]);
  }

  std::vector<Entry> teammate_policy(Index x) const {
    if (x == done_state() || at_goals(x)) return {{kStay, 1.0}};
    return {{mate_.move(decode(x).second), 1.0}};
  }

  std::vector<Entry> joint_successors(Index x, Index a, Index b) const {
    if (x == done_state() || at_goals(x)) return {{done_state(), 1.0}};
    auto [p, t] = decode(x);
    const int t2 = b == kStay ? t : layout_.step(t, b);
    const int tn = t2 < 0 ? t : t2;
    const int target = a == kStay ? -1 : layout_.step(p, a);
    if (target < 0) return {{encode(p, tn), 1.0}};
    std::vector<Entry> out;
    if (eps_ < 1.0) out.push_back({encode(target, tn), 1.0 - eps_});
    if (eps_ > 0.0) out.push_back({encode(p, tn), eps_});
    return out;
  }

  std::vector<Entry> observation(Index, Index y) const {
    if (y == done_state()) return {{0, 1.0}};
    auto [p, t] = decode(y);
    return noisy_categorical_observation(grid_sightings(layout_, p, t), eps_);
  }

  double reward(Index x, Index) const {
    if (x == done_state()) return 0.0;
    return at_goals(x) ? 100.0 : -1.0;
  }

  Belief initial_belief() const {
    std::vector<double> b(num_states(), 1.0 / static_cast<double>(num_states() - 1));
    b.back() = 0.0;
    return Belief(std::move(b));
  }

  std::string label() const { return label_; }
  double discount() const { return gamma_; }

 private:
  GridLayout layout_;
  std::array<int, 2> goals_;
  double eps_;
  double gamma_;
  std::string label_;
  ShortestPathTeammate mate_;
};

/// Two agents on a walled map who may not share a cell. States are ordered
/// pairs of distinct free cells (agent-major, in free-cell order) plus done.
///
/// Collisions: if both end up aiming at the same cell (including one of them
/// staying there) both stay; a swap leaves both in place; moving into a cell
/// the other agent is vacating is allowed.
class MapNavigationDynamics {
 public:
  MapNavigationDynamics(GridLayout layout, std::array<int, 2> goals, double epsilon, double discount = 0.95,
                        std::string label = "map")
      : layout_(std::move(layout)), goals_(goals), eps_(epsilon), gamma_(discount), label_(std::move(label)) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigurationError("map: epsilon must be in [0,1)");
    if (goals[0] == goals[1]) throw ConfigurationError("map: goals must differ");
    cells_ = layout_.free_cells();
    slot_.assign(layout_.num_cells(), -1);
    for (std::size_t i = 0; i < cells_.size(); ++i) slot_[cells_[i]] = static_cast<int>(i);
    for (int g : goals)
      if (g < 0 || g >= layout_.num_cells() || slot_[g] < 0) throw ConfigurationError("map: goal is not a free cell");
    if (cells_.size() < 2) throw ConfigurationError("map: needs at least two free cells");
    mate_ = ShortestPathTeammate(layout_, {goals[0], goals[1]});
  }
  MapNavigationDynamics(const MapNavigationDynamics& o)
      : layout_(o.layout_), goals_(o.goals_), eps_(o.eps_), gamma_(o.gamma_), label_(o.label_), cells_(o.cells_),
        slot_(o.slot_), mate_(layout_, {goals_[0], goals_[1]}) {}
  MapNavigationDynamics& operator=(const MapNavigationDynamics&) = delete;

  const GridLayout& layout() const { return layout_; }
  std::size_t num_free() const { return cells_.size(); }
  std::size_t num_states() const { return num_free() * (num_free() - 1) + 1; }
  std::size_t num_agent_actions() const { return kNumGridMoves; }
  std::size_t num_teammate_actions() const { return kNumGridMoves; }
  std::size_t num_observations() const { return kNumGridObservations; }
  Index done_state() const { return static_cast<Index>(num_states() - 1); }

  Index encode(int agent, int teammate) const {
    const int i = slot_.at(agent), j = slot_.at(teammate);
    return static_cast<Index>(i * static_cast<int>(num_free() - 1) + (j < i ? j : j - 1));
  }
  std::pair<int, int> decode(Index x) const {
    const int m = static_cast<int>(num_free() - 1);
    const int i = static_cast<int>(x) / m, r = static_cast<int>(x) % m;
    return {cells_[i], cells_[r < i ? r : r + 1]};
  }
  bool at_goals(Index x) const {
    if (x == done_state()) return false;
    auto [p, t] = decode(x);
    return (p == goals_[0] && t == goals_[1]) || (p == goals_[1] && t == goals_[0]);
  }

  std::vector<Entry> teammate_policy(Index x) const {
    if (x == done_state() || at_goals(x)) return {{kStay, 1.0}};
    return {{mate_.move(decode(x).second), 1.0}};
  }

  /// Positions after both agents try to move to pa and pt from p and t.
  static std::pair<int, int> resolve(int p, int t, int pa, int pt) {
    if (pa == pt) return {p, t};
    if (pa == t && pt == p) return {p, t};
    return {pa, pt};
  }

  std::vector<Entry> joint_successors(Index x, Index a, Index b) const {
    if (x == done_state() || at_goals(x)) return {{done_state(), 1.0}};
    auto [p, t] = decode(x);
    const int t2 = b == kStay ? t : layout_.step(t, b);
    const int pt = t2 < 0 ? t : t2;
    const int target = a == kStay ? -1 : layout_.step(p, a);
    auto place = [&](int pa) {
      auto [np, nt] = resolve(p, t, pa, pt);
      return encode(np, nt);
    };
    if (target < 0) return {{place(p), 1.0}};
    std::vector<Entry> out;
    if (eps_ < 1.0) out.push_back({place(target), 1.0 - eps_});
    if (eps_ > 0.0) out.push_back({place(p), eps_});
    return out;
  }

  std::vector<Entry> observation(Index, Index y) const {
    if (y == done_state()) return {{0, 1.0}};
    auto [p, t] = decode(y);
    return noisy_categorical_observation(grid_sightings(layout_, p, t), eps_);
  }

  double reward(Index x, Index) const {
    if (x == done_state()) return 0.0;
    return at_goals(x) ? 100.0 : -1.0;
  }

  Belief initial_belief() const {
    std::vector<double> b(num_states(), 1.0 / static_cast<double>(num_states() - 1));
    b.back() = 0.0;
    return Belief(std::move(b));
  }

  std::string label() const { return label_; }
  double discount() const { return gamma_; }

 private:
  GridLayout layout_;
  std::array<int, 2> goals_;
  double eps_;
  double gamma_;
  std::string label_;
  std::vector<int> cells_;
  std::vector<int> slot_;
  ShortestPathTeammate mate_;
};

}  // namespace atpo
