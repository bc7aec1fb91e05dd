#pragma once

#include <memory>
#include <random>
#include <vector>

#include "atpo/bayes/model_library.hpp"
#include "oracles/oracles.hpp"

namespace testing_support {

/// A library of random models with random (unsolved) alpha-vector policies,
/// kept alongside the raw tables the oracles work on.
struct RandomLibrary {
  std::vector<oracle::RawPomdp> raw;
  std::shared_ptr<const atpo::ModelLibrary> lib;
};

inline atpo::AlphaVectorPolicy random_policy(std::size_t n, std::size_t na, std::mt19937_64& g, std::size_t count) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<atpo::AlphaVector> vs;
  for (std::size_t i = 0; i < count; ++i) {
    atpo::AlphaVector v;
    v.action = static_cast<atpo::Index>(g() % na);
    for (std::size_t x = 0; x < n; ++x) v.coeffs.push_back(u(g));
    vs.push_back(std::move(v));
  }
  return atpo::AlphaVectorPolicy(std::move(vs), n, "random");
}

/// `states` may differ per model; actions and observations are shared.
inline RandomLibrary random_library(const std::vector<int>& states, int na, int nz, std::uint64_t seed,
                                    double sparsity = 0.0, std::vector<double> prior = {}) {
  std::mt19937_64 g(seed);
  RandomLibrary out;
  std::vector<atpo::TabularPomdp> models;
  std::vector<atpo::AlphaVectorPolicy> policies;
  for (int n : states) {
    out.raw.push_back(oracle::random_pomdp(n, na, nz, g(), sparsity));
    models.push_back(oracle::to_model(out.raw.back()));
    policies.push_back(random_policy(n, na, g, 1 + g() % 4));
  }
  out.lib = std::make_shared<atpo::ModelLibrary>(std::move(models), std::move(policies), std::move(prior));
  return out;
}

/// Samples a history of length `len` by running model `k` with uniformly random actions.
inline void sample_history(const oracle::RawPomdp& m, int len, std::mt19937_64& g, std::vector<int>& actions,
                           std::vector<int>& observations) {
  auto draw = [&](const oracle::Vec& p) {
    std::discrete_distribution<int> d(p.begin(), p.end());
    return d(g);
  };
  int x = draw(m.b0);
  actions.clear();
  observations.clear();
  for (int t = 0; t < len; ++t) {
    const int a = static_cast<int>(g() % m.na);
    x = draw(m.T[a][x]);
    actions.push_back(a);
    observations.push_back(draw(m.O[a][x]));
  }
}

}  // namespace testing_support
