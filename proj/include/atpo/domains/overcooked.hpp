#pragma once

#include <array>
#include <string>
#include <vector>

#include "atpo/core/errors.hpp"
#include "atpo/domains/compile.hpp"

namespace atpo {

enum OvercookedAction : Index { kRowUp = 0, kRowDown = 1, kNoop = 2, kAct = 3 };
enum class CookType { optimal, random, bottom_balcony, top_balcony };

/// Two-row kitchen. The helper (ad hoc agent) fetches onions at the top and
/// plates at the bottom and drops them on the balcony of its row; the cook
/// takes items from the balconies, fills the pot at the top (three onions
/// cook a soup), plates the soup and serves it at the bottom window.
///
/// Fully observable: the observation is the state itself.
class OvercookedDynamics {
 public:
  enum Item : int { kNone = 0, kOnion = 1, kPlate = 2, kSoup = 3 };
  static constexpr int kCooked = 3;
  static constexpr std::size_t kTuples = 2 * 2 * 3 * 4 * 3 * 3 * 4;

  struct State {
    int helper_row = 0, cook_row = 0;  // 0 top, 1 bottom
    int helper_item = kNone;          // none, onion, plate
    int cook_item = kNone;            // none, onion, plate, soup
    int top_balcony = kNone, bottom_balcony = kNone;
    int pot = 0;                      // onions in the pot; kCooked once full
    bool operator==(const State&) const = default;
  };

  explicit OvercookedDynamics(CookType cook, double discount = 0.95) : cook_(cook), gamma_(discount) {}

  CookType cook() const { return cook_; }
  std::size_t num_states() const { return kTuples + 2; }
  std::size_t num_agent_actions() const { return 4; }
  std::size_t num_teammate_actions() const { return 4; }
  std::size_t num_observations() const { return num_states(); }
  Index delivered_state() const { return static_cast<Index>(kTuples); }
  Index absorbing_state() const { return static_cast<Index>(kTuples + 1); }

  static Index encode(const State& s) {
    std::size_t i = s.helper_row;
    i = i * 2 + s.cook_row;
    i = i * 3 + s.helper_item;
    i = i * 4 + s.cook_item;
    i = i * 3 + s.top_balcony;
    i = i * 3 + s.bottom_balcony;
    i = i * 4 + s.pot;
    return static_cast<Index>(i);
  }
  static State decode(Index x) {
    State s;
    std::size_t i = x;
    s.pot = static_cast<int>(i % 4), i /= 4;
    s.bottom_balcony = static_cast<int>(i % 3), i /= 3;
    s.top_balcony = static_cast<int>(i % 3), i /= 3;
    s.cook_item = static_cast<int>(i % 4), i /= 4;
    s.helper_item = static_cast<int>(i % 3), i /= 3;
    s.cook_row = static_cast<int>(i % 2), i /= 2;
    s.helper_row = static_cast<int>(i);
    return s;
  }

  static void helper_step(State& s, Index a) {
    if (a == kRowUp) s.helper_row = 0;
    if (a == kRowDown) s.helper_row = 1;
    if (a != kAct) return;
    int& balcony = s.helper_row == 0 ? s.top_balcony : s.bottom_balcony;
    if (s.helper_item == kNone) {
      s.helper_item = s.helper_row == 0 ? kOnion : kPlate;
    } else if (balcony == kNone) {
      balcony = s.helper_item;
      s.helper_item = kNone;
    }
  }

  /// Returns true when the cook serves a soup.
  static bool cook_step(State& s, Index b) {
    if (b == kRowUp) s.cook_row = 0;
    if (b == kRowDown) s.cook_row = 1;
    if (b != kAct) return false;
    int& balcony = s.cook_row == 0 ? s.top_balcony : s.bottom_balcony;
    if (s.cook_row == 0) {
      if (s.cook_item == kOnion && s.pot < kCooked) {
        ++s.pot;
        s.cook_item = kNone;
        return false;
      }
      if (s.cook_item == kPlate && s.pot == kCooked) {
        s.pot = 0;
        s.cook_item = kSoup;
        return false;
      }
    } else if (s.cook_item == kSoup) {
      s.cook_item = kNone;
      return true;
    }
    if (s.cook_item == kNone && balcony != kNone) {
      s.cook_item = balcony;
      balcony = kNone;
    } else if ((s.cook_item == kOnion || s.cook_item == kPlate) && balcony == kNone) {
      balcony = s.cook_item;
      s.cook_item = kNone;
    }
    return false;
  }

  /// Scripted cook. The restricted types only use one balcony; the optimal
  /// one uses whichever holds what it needs.
  Index cook_action(const State& s) const {
    const int needed = s.pot == kCooked ? kPlate : kOnion;
    auto go = [](int row) { return row == 0 ? kRowUp : kRowDown; };
    if (s.cook_item == kSoup) return s.cook_row == 1 ? kAct : kRowDown;
    if (s.cook_item == needed) return s.cook_row == 0 ? kAct : kRowUp;
    const bool use_top = cook_ != CookType::bottom_balcony;
    const bool use_bottom = cook_ != CookType::top_balcony;
    const int here = s.cook_row == 0 ? s.top_balcony : s.bottom_balcony;
    const int there = s.cook_row == 0 ? s.bottom_balcony : s.top_balcony;
    const bool here_usable = s.cook_row == 0 ? use_top : use_bottom;
    const bool there_usable = s.cook_row == 0 ? use_bottom : use_top;
    const int other_row = 1 - s.cook_row;
    if (s.cook_item != kNone) {  // wrong item: put it down
      if (here_usable && here == kNone) return kAct;
      if (there_usable && there == kNone) return go(other_row);
      return kNoop;
    }
    if (here_usable && here == needed) return kAct;
    if (there_usable && there == needed) return go(other_row);
    return kNoop;
  }

  std::vector<Entry> teammate_policy(Index x) const {
    if (x >= delivered_state()) return {{kNoop, 1.0}};
    if (cook_ == CookType::random) return {{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}};
    return {{cook_action(decode(x)), 1.0}};
  }

  std::vector<Entry> joint_successors(Index x, Index a, Index b) const {
    if (x >= delivered_state()) return {{absorbing_state(), 1.0}};
    State s = decode(x);
    helper_step(s, a);
    if (cook_step(s, b)) return {{delivered_state(), 1.0}};
    return {{encode(s), 1.0}};
  }

  std::vector<Entry> observation(Index, Index y) const { return {{y, 1.0}}; }

  double reward(Index x, Index) const {
    if (x == absorbing_state()) return 0.0;
    return x == delivered_state() ? 100.0 : -1.0;
  }

  /// Empty hands, counters and pot; both agents' rows uniform.
  Belief initial_belief() const {
    std::vector<Index> support;
    for (int h = 0; h < 2; ++h)
      for (int c = 0; c < 2; ++c) {
        State s;
        s.helper_row = h;
        s.cook_row = c;
        support.push_back(encode(s));
      }
    return Belief::uniform_over(num_states(), support);
  }

  std::string label() const {
    static const std::array<const char*, 4> names{"optimal", "random", "bottom-balcony", "top-balcony"};
    return std::string("overcooked/cook=") + names[static_cast<int>(cook_)];
  }
  double discount() const { return gamma_; }

 private:
  CookType cook_;
  double gamma_;
};

}  // namespace atpo
