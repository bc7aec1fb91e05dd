#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "atpo/core/model_io.hpp"
#include "atpo/core/pomdp.hpp"

namespace atpo {

struct AlphaVector {
  std::vector<double> coeffs;
  Index action = 0;
};

struct PerseusSettings {
  std::size_t belief_set_size = 5000;
  std::size_t horizon = 50;
  double tolerance = 0.01;
  std::size_t stage_cap = 500;
  std::uint64_t seed = 0;

  std::string key() const {
    std::ostringstream os;
    os << "beliefs=" << belief_set_size << " horizon=" << horizon << " tolerance=" << format_real(tolerance)
       << " stage_cap=" << stage_cap << " seed=" << seed;
    return os.str();
  }
};

/// What the solver did; persisted alongside the vectors.
struct SolverInfo {
  PerseusSettings settings;
  std::uint64_t model_hash = 0;
  std::size_t stages = 0;
  std::size_t belief_set_size = 0;
  std::size_t backups = 0;
  double residual = 0.0;  // largest value improvement in the final stage
  double min_stage_delta = 0.0;  // smallest V_{s+1}(b) - V_s(b) seen over all stages and beliefs
  bool converged = false;
};

/// A POMDP policy as a set of value hyperplanes, each tagged with an action.
class AlphaVectorPolicy {
 public:
  struct Evaluation {
    double value;
    std::size_t vector;
    Index action;
  };

  AlphaVectorPolicy() = default;
  AlphaVectorPolicy(std::vector<AlphaVector> vectors, std::size_t num_states, std::string model_label,
                    SolverInfo info = {})
      : vectors_(std::move(vectors)), num_states_(num_states), label_(std::move(model_label)), info_(info) {
    if (vectors_.empty()) throw std::invalid_argument("AlphaVectorPolicy: no vectors");
    for (const auto& v : vectors_)
      if (v.coeffs.size() != num_states_) throw std::invalid_argument("AlphaVectorPolicy: vector length mismatch");
  }

  const std::vector<AlphaVector>& vectors() const { return vectors_; }
  std::size_t size() const { return vectors_.size(); }
  std::size_t num_states() const { return num_states_; }
  const std::string& model_label() const { return label_; }
  const SolverInfo& info() const { return info_; }

  /// max_i <alpha_i, b>; among maximizers the lowest action wins.
  Evaluation evaluate(std::span<const double> b) const {
    Evaluation best{-std::numeric_limits<double>::infinity(), 0, 0};
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      const auto& c = vectors_[i].coeffs;
      double v = 0.0;
      for (std::size_t x = 0; x < b.size(); ++x)
        if (b[x] != 0.0) v += c[x] * b[x];
      const bool better = v > best.value + 1e-12;
      const bool tie_lower = !better && v >= best.value - 1e-12 && vectors_[i].action < best.action;
      if (better || tie_lower) best = {std::max(v, tie_lower ? best.value : v), i, vectors_[i].action};
    }
    return best;
  }

 private:
  std::vector<AlphaVector> vectors_;
  std::size_t num_states_ = 0;
  std::string label_;
  SolverInfo info_;
};

/// Raw max-alpha value of the policy at b.
inline double policy_value(const AlphaVectorPolicy& policy, const Belief& b) { return policy.evaluate(b.probs()).value; }

/// Action of the maximizing alpha vector (lowest action on ties).
inline Index policy_action(const AlphaVectorPolicy& policy, const Belief& b) {
  return policy.evaluate(b.probs()).action;
}

/// One-step lookahead q(b, a) = sum_x b(x) R[x][a] + gamma sum_z P(z|b,a) V(Bel(b,a,z)),
/// with V the max-alpha value. Observations of zero likelihood contribute 0.
///
/// Uses P(z|b,a) V(Bel(b,a,z)) = max_i <alpha_i, unnormalized successor>, so no
/// division is needed.
inline double policy_q(const TabularPomdp& m, const AlphaVectorPolicy& policy, const Belief& b, Index a) {
  double immediate = 0.0;
  for (Index x = 0; x < b.size(); ++x)
    if (b[x] != 0.0) immediate += b[x] * m.reward(x, a);

  const auto pred = predict(m, b.probs(), a);
  // Unnormalized successor beliefs, one sparse list per observation.
  std::vector<std::vector<Entry>> per_z(m.num_observations());
  for (Index y = 0; y < pred.size(); ++y) {
    if (pred[y] == 0.0) continue;
    m.observation(a, y).for_each([&](Index z, double p) { per_z[z].push_back({y, pred[y] * p}); });
  }
  double future = 0.0;
  for (const auto& succ : per_z) {
    if (succ.empty()) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& alpha : policy.vectors()) {
      double v = 0.0;
      for (const Entry& e : succ) v += alpha.coeffs[e.col] * e.prob;
      best = std::max(best, v);
    }
    future += best;
  }
  return immediate + m.discount() * future;
}

inline std::vector<double> policy_q_all(const TabularPomdp& m, const AlphaVectorPolicy& policy, const Belief& b) {
  std::vector<double> q(m.num_actions());
  for (Index a = 0; a < m.num_actions(); ++a) q[a] = policy_q(m, policy, b, a);
  return q;
}

/// v(b) := max_a policy_q(b, a). This is the value the loss is measured against,
/// which keeps the loss nonnegative even for approximate alpha-vector sets.
inline double lookahead_value(const TabularPomdp& m, const AlphaVectorPolicy& policy, const Belief& b) {
  auto q = policy_q_all(m, policy, b);
  return *std::max_element(q.begin(), q.end());
}

/// argmax_a policy_q(b, a), lowest index on ties.
inline Index lookahead_action(const TabularPomdp& m, const AlphaVectorPolicy& policy, const Belief& b) {
  auto q = policy_q_all(m, policy, b);
  Index best = 0;
  for (Index a = 1; a < q.size(); ++a)
    if (q[a] > q[best] + 1e-12) best = a;
  return best;
}

/// l(a) = max_a' q(b, a') - q(b, a), clamped at 0.
inline double loss(const TabularPomdp& m, const AlphaVectorPolicy& policy, const Belief& b, Index a) {
  auto q = policy_q_all(m, policy, b);
  const double v = *std::max_element(q.begin(), q.end());
  return std::max(0.0, v - q.at(a));
}

/// Loss of every action at once (shares the q computation).
inline std::vector<double> loss_all(const TabularPomdp& m, const AlphaVectorPolicy& policy, const Belief& b) {
  auto q = policy_q_all(m, policy, b);
  const double v = *std::max_element(q.begin(), q.end());
  for (double& x : q) x = std::max(0.0, v - x);
  return q;
}

// ---------------------------------------------------------------------------
// Policy files
//
//   atpo-policy 1
//   label <model label>
//   model_hash <16 hex digits>
//   settings beliefs=.. horizon=.. tolerance=.. stage_cap=.. seed=..
//   solver stages=.. belief_set=.. backups=.. residual=.. min_stage_delta=.. converged=..
//   states <n>
//   vectors <count>
//   <action> <c_0> ... <c_{n-1}>      (one line per vector)
//   end

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline void write_policy(std::ostream& os, const AlphaVectorPolicy& p) {
  const auto& i = p.info();
  os << "atpo-policy 1\n";
  os << "label " << p.model_label() << "\n";
  os << "model_hash " << hex64(i.model_hash) << "\n";
  os << "settings " << i.settings.key() << "\n";
  os << "solver stages=" << i.stages << " belief_set=" << i.belief_set_size << " backups=" << i.backups
     << " residual=" << format_real(i.residual) << " min_stage_delta=" << format_real(i.min_stage_delta)
     << " converged=" << (i.converged ? 1 : 0) << "\n";
  os << "states " << p.num_states() << "\n";
  os << "vectors " << p.size() << "\n";
  for (const auto& v : p.vectors()) {
    os << v.action;
    for (double c : v.coeffs) os << ' ' << format_real(c);
    os << '\n';
  }
  os << "end\n";
}

namespace detail {

inline std::string field(const std::string& kvs, const std::string& key) {
  std::istringstream is(kvs);
  std::string tok;
  while (is >> tok)
    if (tok.compare(0, key.size() + 1, key + "=") == 0) return tok.substr(key.size() + 1);
  throw FormatError("policy file: missing field '" + key + "'");
}

}  // namespace detail

inline AlphaVectorPolicy read_policy(std::istream& is) {
  std::string line;
  auto next = [&](const std::string& key) {
    if (!std::getline(is, line)) throw FormatError("policy file: unexpected end of file");
    if (line.compare(0, key.size(), key) != 0) throw FormatError("policy file: expected '" + key + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  };
  if (next("atpo-policy") != "1") throw FormatError("policy file: unsupported version");
  std::string label = next("label");
  SolverInfo info;
  info.model_hash = std::stoull(next("model_hash"), nullptr, 16);
  const std::string s = next("settings");
  info.settings.belief_set_size = std::stoull(detail::field(s, "beliefs"));
  info.settings.horizon = std::stoull(detail::field(s, "horizon"));
  info.settings.tolerance = parse_real(detail::field(s, "tolerance"));
  info.settings.stage_cap = std::stoull(detail::field(s, "stage_cap"));
  info.settings.seed = std::stoull(detail::field(s, "seed"));
  const std::string sv = next("solver");
  info.stages = std::stoull(detail::field(sv, "stages"));
  info.belief_set_size = std::stoull(detail::field(sv, "belief_set"));
  info.backups = std::stoull(detail::field(sv, "backups"));
  info.residual = parse_real(detail::field(sv, "residual"));
  info.min_stage_delta = parse_real(detail::field(sv, "min_stage_delta"));
  info.converged = detail::field(sv, "converged") == "1";
  const std::size_t n = std::stoull(next("states"));
  const std::size_t count = std::stoull(next("vectors"));
  std::vector<AlphaVector> vectors(count);
  for (auto& v : vectors) {
    if (!std::getline(is, line)) throw FormatError("policy file: truncated vector list");
    std::istringstream ls(line);
    if (!(ls >> v.action)) throw FormatError("policy file: malformed vector line");
    v.coeffs.reserve(n);
    std::string tok;
    while (ls >> tok) v.coeffs.push_back(parse_real(tok));
    if (v.coeffs.size() != n) throw FormatError("policy file: vector has wrong length");
  }
  if (!std::getline(is, line) || line != "end") throw FormatError("policy file: missing 'end'");
  return AlphaVectorPolicy(std::move(vectors), n, std::move(label), info);
}

}  // namespace atpo
