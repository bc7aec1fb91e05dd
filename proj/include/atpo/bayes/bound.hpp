#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace atpo {

/// One recorded step for the regret bound: p_t and l_t(pi_k | m*) for every k.
struct BoundStep {
  std::vector<double> posterior;
  std::vector<double> per_model_loss;
};

struct BoundReport {
  std::vector<double> loss_p;  // L_t(p_t)
  std::vector<double> loss_q;  // L_t(q)
  std::vector<double> comparator;
  double left = 0.0;
  double right = 0.0;
  double kl_sum = 0.0;
  double eta = 0.0;
  double r_max = 0.0;
  double discount = 0.0;
  std::size_t horizon = 0;
  bool violated = false;
};

/// KL(q || p); infinite when q puts mass where p has none.
inline double kl_divergence(const std::vector<double>& q, const std::vector<double>& p) {
  double d = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] == 0.0) continue;
    if (p[k] == 0.0) return std::numeric_limits<double>::infinity();
    d += q[k] * std::log(q[k] / p[k]);
  }
  return d;
}

/// Checks
///   sum_t L_t(p_t) <= sum_t L_t(q) + (1/eta) sum_t KL(q || p_t) + eta R_max^2 / (1 - gamma)^2
/// with eta = sqrt(T / 2), over a recorded trajectory of length T.
inline BoundReport check_bound(const std::vector<BoundStep>& trace, const std::vector<double>& q, double r_max,
                               double discount, double tolerance = 1e-6) {
  BoundReport r;
  r.comparator = q;
  r.r_max = r_max;
  r.discount = discount;
  r.horizon = trace.size();
  if (trace.empty()) return r;
  const double T = static_cast<double>(trace.size());
  r.eta = std::sqrt(T / 2.0);
  double sum_q = 0.0;
  for (const auto& step : trace) {
    double lp = 0.0, lq = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      lp += step.posterior[k] * step.per_model_loss[k];
      lq += q[k] * step.per_model_loss[k];
    }
    r.loss_p.push_back(lp);
    r.loss_q.push_back(lq);
    r.left += lp;
    sum_q += lq;
    r.kl_sum += kl_divergence(q, step.posterior);
  }
  const double scale = r_max / (1.0 - discount);
  r.right = sum_q + r.kl_sum / r.eta + r.eta * scale * scale;
  r.violated = r.left > r.right + tolerance;
  return r;
}

}  // namespace atpo
