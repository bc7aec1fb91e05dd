#pragma once

// Brute-force reference computations used by the tests. Everything here works
// on plain nested vectors and enumerates explicitly; none of it calls into the
// library except `to_model`, which only copies tables into a TabularPomdp.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "atpo/core/pomdp.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using Cube = std::vector<Mat>;

struct RawPomdp {
  int n = 0, na = 0, nz = 0;
  Cube T;  // T[a][x][y]
  Cube O;  // O[a][y][z]
  Mat R;   // R[x][a]
  Vec b0;
  double gamma = 0.95;
};

inline Vec random_simplex(int n, std::mt19937_64& g, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = u(g) < zero_prob ? 0.0 : u(g) + 1e-3;
    s += x;
  }
  if (s == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= s;
  return v;
}

/// Random stochastic model. `sparsity` is the chance that an entry is forced
/// to zero, which makes some observations impossible from some states.
inline RawPomdp random_pomdp(int n, int na, int nz, std::uint64_t seed, double sparsity = 0.0) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> r(-5.0, 5.0);
  RawPomdp m;
  m.n = n;
  m.na = na;
  m.nz = nz;
  m.T.assign(na, Mat(n));
  m.O.assign(na, Mat(n));
  for (int a = 0; a < na; ++a)
    for (int x = 0; x < n; ++x) {
      m.T[a][x] = random_simplex(n, g, sparsity);
      m.O[a][x] = random_simplex(nz, g, sparsity);
    }
  m.R.assign(n, Vec(na));
  for (auto& row : m.R)
    for (auto& v : row) v = r(g);
  m.b0 = random_simplex(n, g);
  return m;
}

inline atpo::TabularPomdp to_model(const RawPomdp& m, std::size_t sparse_threshold = atpo::kDefaultSparseThreshold) {
  atpo::PomdpBuilder b(m.n, m.na, m.nz);
  b.discount(m.gamma).initial_belief(atpo::Belief(m.b0)).label("oracle");
  for (int a = 0; a < m.na; ++a)
    for (int x = 0; x < m.n; ++x) {
      for (int y = 0; y < m.n; ++y)
        if (m.T[a][x][y] != 0.0) b.add_transition(a, x, y, m.T[a][x][y]);
      for (int z = 0; z < m.nz; ++z)
        if (m.O[a][x][z] != 0.0) b.add_observation(a, x, z, m.O[a][x][z]);
    }
  for (int x = 0; x < m.n; ++x)
    for (int a = 0; a < m.na; ++a) b.set_reward(x, a, m.R[x][a]);
  return std::move(b).build(sparse_threshold);
}

/// Unnormalized P(X_t = x, z_1..z_t | a_0..a_{t-1}) by summing over every
/// state sequence x_0..x_t explicitly.
inline Vec joint_by_paths(const RawPomdp& m, const Vec& b0, const std::vector<int>& actions,
                          const std::vector<int>& observations) {
  const int len = static_cast<int>(actions.size());
  Vec out(m.n, 0.0);
  std::vector<int> seq(len + 1, 0);
  std::function<void(int, double)> rec = [&](int t, double w) {
    if (w == 0.0) return;
    if (t == len) {
      out[seq[t]] += w;
      return;
    }
    for (int y = 0; y < m.n; ++y) {
      seq[t + 1] = y;
      rec(t + 1, w * m.T[actions[t]][seq[t]][y] * m.O[actions[t]][y][observations[t]]);
    }
  };
  for (int x0 = 0; x0 < m.n; ++x0) {
    seq[0] = x0;
    rec(0, b0[x0]);
  }
  return out;
}

inline Vec normalized(Vec v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0)
    for (auto& x : v) x /= s;
  return v;
}

/// Exhaustive joint posterior over (model, state): result[k][x] = P(M=k, X_t=x | h).
inline Mat joint_model_state_posterior(const std::vector<RawPomdp>& lib, const Vec& prior,
                                       const std::vector<int>& actions, const std::vector<int>& observations) {
  Mat out(lib.size());
  double total = 0.0;
  for (std::size_t k = 0; k < lib.size(); ++k) {
    out[k] = joint_by_paths(lib[k], lib[k].b0, actions, observations);
    for (auto& v : out[k]) {
      v *= prior[k];
      total += v;
    }
  }
  for (auto& row : out)
    for (auto& v : row) v = total > 0.0 ? v / total : 0.0;
  return out;
}

/// q(b,a) for the max-of-dot-products value function V(b) = max_i <alpha_i, b>,
/// expanded as sum_x b(x) R + gamma sum_z P(z|b,a) V(b_az) with b_az formed
/// by explicit normalization.
inline double q_triple_sum(const RawPomdp& m, const Mat& alphas, const Vec& b, int a) {
  double immediate = 0.0;
  for (int x = 0; x < m.n; ++x) immediate += b[x] * m.R[x][a];
  double future = 0.0;
  for (int z = 0; z < m.nz; ++z) {
    Vec succ(m.n, 0.0);
    double pz = 0.0;
    for (int y = 0; y < m.n; ++y) {
      for (int x = 0; x < m.n; ++x) succ[y] += b[x] * m.T[a][x][y] * m.O[a][y][z];
      pz += succ[y];
    }
    if (pz == 0.0) continue;
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& alpha : alphas) {
      double d = 0.0;
      for (int y = 0; y < m.n; ++y) d += alpha[y] * succ[y] / pz;
      v = std::max(v, d);
    }
    future += pz * v;
  }
  return immediate + m.gamma * future;
}

/// A single-agent or joint-action MDP as raw tables: P[j][x][y], R[x][j].
struct RawMdp {
  int n = 0, nj = 0;
  Cube P;
  Mat R;
  double gamma = 0.95;
};

inline RawMdp random_mdp(int n, int nj, std::uint64_t seed, double gamma = 0.9) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> r(-10.0, 10.0);
  RawMdp m;
  m.n = n;
  m.nj = nj;
  m.gamma = gamma;
  m.P.assign(nj, Mat(n));
  for (auto& block : m.P)
    for (auto& row : block) row = random_simplex(n, g, 0.3);
  m.R.assign(n, Vec(nj));
  for (auto& row : m.R)
    for (auto& v : row) v = r(g);
  return m;
}

/// Plain synchronous value iteration for a fixed number of sweeps.
inline Vec long_sweep(const RawMdp& m, int sweeps) {
  Vec v(m.n, 0.0);
  for (int it = 0; it < sweeps; ++it) {
    Vec next(m.n, -std::numeric_limits<double>::infinity());
    for (int x = 0; x < m.n; ++x)
      for (int j = 0; j < m.nj; ++j) {
        double q = m.R[x][j];
        for (int y = 0; y < m.n; ++y) q += m.gamma * m.P[j][x][y] * v[y];
        next[x] = std::max(next[x], q);
      }
    v = next;
  }
  return v;
}

inline Mat q_from_values(const RawMdp& m, const Vec& v) {
  Mat q(m.n, Vec(m.nj));
  for (int x = 0; x < m.n; ++x)
    for (int j = 0; j < m.nj; ++j) {
      q[x][j] = m.R[x][j];
      for (int y = 0; y < m.n; ++y) q[x][j] += m.gamma * m.P[j][x][y] * v[y];
    }
  return q;
}

/// Posterior over models from the product of observed transition likelihoods,
/// each model given as P_k[a][x][y].
inline Vec transition_likelihood_posterior(const std::vector<Cube>& models, const Vec& prior,
                                           const std::vector<int>& states, const std::vector<int>& actions) {
  Vec post(models.size());
  double total = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    double w = prior[k];
    for (std::size_t t = 0; t < actions.size(); ++t) w *= models[k][actions[t]][states[t]][states[t + 1]];
    post[k] = w;
    total += w;
  }
  for (auto& p : post) p /= total;
  return post;
}

}  // namespace oracle
