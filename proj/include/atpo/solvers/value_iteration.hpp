#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "atpo/core/mmdp.hpp"

namespace atpo {

/// Optimal state values of an (M)MDP together with q* and the greedy joint
/// policy (lowest joint index on ties).
struct StateValueFunction {
  std::vector<double> values;
  std::vector<double> q;  // q[x * joint + j]
  std::vector<Index> greedy;
  std::size_t num_joint_actions = 0;
  std::size_t iterations = 0;
  double residual = 0.0;

  double q_value(Index x, Index joint) const { return q[static_cast<std::size_t>(x) * num_joint_actions + joint]; }
};

/// q-values closer than this count as tied; ties go to the lowest index.
inline constexpr double kTieTolerance = 1e-10;

struct ValueIterationOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 100000;
};

namespace detail {

inline double backup_q(const TabularMmdp& m, const std::vector<double>& v, Index x, Index j) {
  double future = 0.0;
  m.transition(j, x).for_each([&](Index y, double p) { future += p * v[y]; });
  return m.reward(x, j) + m.discount() * future;
}

}  // namespace detail

/// Jacobi value iteration. Stops once the sup-norm Bellman residual of the
/// returned values is at most `tolerance`.
inline StateValueFunction value_iteration(const TabularMmdp& m, ValueIterationOptions opts = {}) {
  if (!(m.discount() < 1.0)) throw std::invalid_argument("value_iteration: discount must be < 1");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be positive");
  const std::size_t n = m.num_states();
  const std::size_t nj = m.num_joint_actions();
  std::vector<double> v(n, 0.0), next(n, 0.0);

  StateValueFunction out;
  out.num_joint_actions = nj;
  for (std::size_t it = 1;; ++it) {
    double residual = 0.0;
    for (Index x = 0; x < n; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < nj; ++j) best = std::max(best, detail::backup_q(m, v, x, j));
      next[x] = best;
      residual = std::max(residual, std::abs(best - v[x]));
    }
    v.swap(next);
    // `residual` is ||v_it - v_{it-1}||; the Bellman residual of v_it is at most gamma times that.
    if (m.discount() * residual <= opts.tolerance) {
      out.iterations = it;
      break;
    }
    if (it >= opts.max_iterations)
      throw NonconvergenceBudget("value_iteration: no convergence within " + std::to_string(opts.max_iterations) +
                                 " sweeps on '" + m.label() + "'");
  }

  out.values = v;
  out.q.assign(n * nj, 0.0);
  out.greedy.assign(n, 0);
  double residual = 0.0;
  for (Index x = 0; x < n; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    double top = best;
    for (Index j = 0; j < nj; ++j) {
      const double q = detail::backup_q(m, v, x, j);
      out.q[x * nj + j] = q;
      top = std::max(top, q);
      if (q > best + kTieTolerance) {
        best = q;
        out.greedy[x] = j;
      }
    }
    residual = std::max(residual, std::abs(top - v[x]));
  }
  out.residual = residual;
  return out;
}

/// Sup-norm of T(v) - v.
inline double bellman_residual(const TabularMmdp& m, const std::vector<double>& v) {
  double residual = 0.0;
  for (Index x = 0; x < m.num_states(); ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m.num_joint_actions(); ++j) best = std::max(best, detail::backup_q(m, v, x, j));
    residual = std::max(residual, std::abs(best - v[x]));
  }
  return residual;
}

}  // namespace atpo
