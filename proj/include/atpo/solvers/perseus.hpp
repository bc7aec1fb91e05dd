#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "atpo/core/pomdp.hpp"
#include "atpo/solvers/alpha_vectors.hpp"

namespace atpo {

/// Per-stage progress of a Perseus run.
struct StageStats {
  std::size_t vectors = 0;
  std::size_t backups = 0;
  double max_improvement = 0.0;
  double min_delta = 0.0;  // min_b V_{s+1}(b) - V_s(b); never below 0 up to rounding
};

using SparseBelief = std::vector<Entry>;

namespace perseus_detail {

inline SparseBelief sparsify(std::span<const double> b) {
  SparseBelief out;
  for (Index x = 0; x < b.size(); ++x)
    if (b[x] != 0.0) out.push_back({x, b[x]});
  return out;
}

inline double dot(const std::vector<double>& alpha, const SparseBelief& b) {
  double v = 0.0;
  for (const Entry& e : b) v += alpha[e.col] * e.prob;
  return v;
}

inline double l1(const SparseBelief& a, const SparseBelief& b) {
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].col < b[j].col)) {
      d += std::abs(a[i++].prob);
    } else if (i == a.size() || b[j].col < a[i].col) {
      d += std::abs(b[j++].prob);
    } else {
      d += std::abs(a[i++].prob - b[j++].prob);
    }
  }
  return d;
}

/// Deduplicating belief store: beliefs within L1 distance 1e-9 are merged.
/// Candidates are found by hashing values rounded to a coarse grid.
class BeliefSet {
 public:
  bool insert(SparseBelief b) {
    const std::uint64_t h = key(b);
    auto& bucket = buckets_[h];
    for (std::size_t idx : bucket)
      if (l1(items_[idx], b) <= 1e-9) return false;
    bucket.push_back(items_.size());
    items_.push_back(std::move(b));
    return true;
  }
  std::size_t size() const { return items_.size(); }
  std::vector<SparseBelief> release() { return std::move(items_); }

 private:
  static std::uint64_t key(const SparseBelief& b) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Entry& e : b) {
      const auto q = static_cast<std::int64_t>(std::llround(e.prob * 1e7));
      if (q == 0) continue;
      h = splitmix64(h ^ (static_cast<std::uint64_t>(e.col) * 0x9e3779b97f4a7c15ULL) ^ static_cast<std::uint64_t>(q));
    }
    return h;
  }

  std::vector<SparseBelief> items_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

/// Scratch buffers for point backups, sized once per solve.
struct BackupWorkspace {
  std::vector<double> predicted;
  std::vector<Index> touched;
  std::vector<std::vector<Entry>> per_z;
  std::vector<Index> touched_z;
  std::vector<std::size_t> choice;
  std::vector<double> g;

  BackupWorkspace(std::size_t states, std::size_t observations)
      : predicted(states, 0.0), per_z(observations), choice(observations, 0), g(states, 0.0) {}
};

}  // namespace perseus_detail

/// Collects up to `count` distinct beliefs reachable from b0 under
/// uniform-random actions, in episodes of `horizon` steps. Stops early when
/// many consecutive episodes produce nothing new.
inline std::vector<SparseBelief> collect_beliefs(const TabularPomdp& m, std::size_t count, std::size_t horizon,
                                                 Rng& rng) {
  perseus_detail::BeliefSet set;
  const std::size_t patience = 200;
  std::size_t stale_episodes = 0;
  set.insert(perseus_detail::sparsify(m.initial_belief().probs()));
  while (set.size() < count && stale_episodes < patience) {
    bool grew = false;
    Index x = sample_belief(m.initial_belief(), rng);
    Belief b = m.initial_belief();
    for (std::size_t t = 0; t < horizon && set.size() < count; ++t) {
      const Index a = static_cast<Index>(rng() % m.num_actions());
      const auto step = simulate_step(m, x, a, rng);
      auto upd = belief_update(m, b, a, step.observation);
      if (!upd.valid) break;
      b = std::move(upd.belief);
      x = step.next_state;
      grew = set.insert(perseus_detail::sparsify(b.probs())) || grew;
    }
    stale_episodes = grew ? 0 : stale_episodes + 1;
  }
  return set.release();
}

/// Point-based backup of V at belief b. Returns the best backed-up vector
/// over all actions.
inline AlphaVector point_backup(const TabularPomdp& m, const std::vector<AlphaVector>& V, const SparseBelief& b,
                                perseus_detail::BackupWorkspace& ws) {
  using perseus_detail::dot;
  const double gamma = m.discount();
  const std::size_t n = m.num_states();

  // Vector used for observations that cannot occur from b.
  std::size_t fallback = 0;
  {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < V.size(); ++i) {
      const double v = dot(V[i].coeffs, b);
      if (v > best) {
        best = v;
        fallback = i;
      }
    }
  }

  AlphaVector best_alpha;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> alpha(n);
  for (Index a = 0; a < m.num_actions(); ++a) {
    for (const Entry& e : b)
      m.transition(a, e.col).for_each([&](Index y, double p) {
        if (ws.predicted[y] == 0.0) ws.touched.push_back(y);
        ws.predicted[y] += e.prob * p;
      });
    for (Index y : ws.touched) {
      const double py = ws.predicted[y];
      m.observation(a, y).for_each([&](Index z, double o) {
        if (ws.per_z[z].empty()) ws.touched_z.push_back(z);
        ws.per_z[z].push_back({y, py * o});
      });
    }
    std::fill(ws.choice.begin(), ws.choice.end(), fallback);
    for (Index z : ws.touched_z) {
      const auto& succ = ws.per_z[z];
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < V.size(); ++i) {
        double v = 0.0;
        for (const Entry& e : succ) v += V[i].coeffs[e.col] * e.prob;
        if (v > best) {
          best = v;
          ws.choice[z] = i;
        }
      }
    }
    // g(y) = sum_z O[a][y][z] alpha_{choice(z)}(y)
    for (Index y = 0; y < n; ++y) {
      double g = 0.0;
      m.observation(a, y).for_each([&](Index z, double o) { g += o * V[ws.choice[z]].coeffs[y]; });
      ws.g[y] = g;
    }
    for (Index x = 0; x < n; ++x) {
      double future = 0.0;
      m.transition(a, x).for_each([&](Index y, double p) { future += p * ws.g[y]; });
      alpha[x] = m.reward(x, a) + gamma * future;
    }
    const double value = dot(alpha, b);
    if (value > best_value + 1e-12) {
      best_value = value;
      best_alpha.coeffs = alpha;
      best_alpha.action = a;
    }

    for (Index y : ws.touched) ws.predicted[y] = 0.0;
    ws.touched.clear();
    for (Index z : ws.touched_z) ws.per_z[z].clear();
    ws.touched_z.clear();
  }
  return best_alpha;
}

/// A backup that matches the old value up to rounding still counts as an
/// improvement. Without this, a backup equal to the initial lower bound can be
/// rejected by one ulp, the carried-over lower bound then "improves" every
/// belief and the solve stops after one stage.
inline constexpr double kBackupSlack = 1e-10;

/// Randomized point-based value iteration over a sampled belief set.
///
/// Each stage visits the beliefs in a freshly drawn random order, backing up
/// only those not yet improved by a vector added earlier in the stage; a
/// backup that does not improve its belief is replaced by that belief's best
/// old vector, so V_{s+1}(b) >= V_s(b) for every collected b.
inline AlphaVectorPolicy perseus_solve(const TabularPomdp& m, const PerseusSettings& settings,
                                       std::vector<StageStats>* stage_log = nullptr) {
  using perseus_detail::dot;
  if (settings.belief_set_size < 1) throw std::invalid_argument("perseus_solve: belief_set_size must be >= 1");
  if (!(m.discount() < 1.0)) throw std::invalid_argument("perseus_solve: discount must be < 1");
  auto problems = validate(m);
  if (!problems.empty()) throw ConfigurationError("perseus_solve: invalid model '" + m.label() + "': " + problems[0].message);

  Rng rng(splitmix64(settings.seed ^ 0x5045525345555355ULL));
  const auto B = collect_beliefs(m, settings.belief_set_size, settings.horizon, rng);

  double min_r = std::numeric_limits<double>::infinity();
  for (double r : m.rewards()) min_r = std::min(min_r, r);
  std::vector<AlphaVector> V{{std::vector<double>(m.num_states(), min_r / (1.0 - m.discount())), 0}};

  std::vector<double> values(B.size());
  for (std::size_t i = 0; i < B.size(); ++i) values[i] = dot(V[0].coeffs, B[i]);

  SolverInfo info;
  info.settings = settings;
  info.model_hash = m.content_hash();
  info.belief_set_size = B.size();
  info.min_stage_delta = std::numeric_limits<double>::infinity();

  perseus_detail::BackupWorkspace ws(m.num_states(), m.num_observations());
  std::vector<std::size_t> order(B.size());
  std::vector<double> next_values(B.size());
  std::vector<char> improved(B.size());
  std::vector<std::size_t> reused;  // indices of old vectors already carried over this stage

  for (std::size_t stage = 1; stage <= settings.stage_cap; ++stage) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::fill(next_values.begin(), next_values.end(), -std::numeric_limits<double>::infinity());
    std::fill(improved.begin(), improved.end(), 0);
    reused.clear();
    std::vector<AlphaVector> next;
    StageStats st;

    auto add_vector = [&](AlphaVector v) {
      for (std::size_t j = 0; j < B.size(); ++j) {
        const double val = dot(v.coeffs, B[j]);
        if (val > next_values[j]) next_values[j] = val;
        if (!improved[j] && next_values[j] >= values[j]) improved[j] = 1;
      }
      next.push_back(std::move(v));
    };

    for (std::size_t idx : order) {
      if (improved[idx]) continue;
      AlphaVector alpha = point_backup(m, V, B[idx], ws);
      ++st.backups;
      if (dot(alpha.coeffs, B[idx]) >= values[idx] - kBackupSlack) {
        add_vector(std::move(alpha));
      } else {
        std::size_t old = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < V.size(); ++i) {
          const double v = dot(V[i].coeffs, B[idx]);
          if (v > best) {
            best = v;
            old = i;
          }
        }
        if (std::find(reused.begin(), reused.end(), old) == reused.end()) {
          reused.push_back(old);
          add_vector(V[old]);
        } else {
          improved[idx] = 1;  // already carried over; its value is unchanged
        }
      }
    }

    st.max_improvement = -std::numeric_limits<double>::infinity();
    st.min_delta = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < B.size(); ++j) {
      const double d = next_values[j] - values[j];
      st.max_improvement = std::max(st.max_improvement, d);
      st.min_delta = std::min(st.min_delta, d);
    }
    st.vectors = next.size();
    V = std::move(next);
    values = next_values;

    info.stages = stage;
    info.backups += st.backups;
    info.residual = st.max_improvement;
    info.min_stage_delta = std::min(info.min_stage_delta, st.min_delta);
    if (stage_log) stage_log->push_back(st);
    if (st.max_improvement <= settings.tolerance) {
      info.converged = true;
      break;
    }
  }
  return AlphaVectorPolicy(std::move(V), m.num_states(), m.label(), info);
}

}  // namespace atpo
