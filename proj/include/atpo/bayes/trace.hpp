#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "atpo/bayes/atpo.hpp"
#include "atpo/core/model_io.hpp"

namespace atpo {

/// One row of a posterior trace.
struct TraceRecord {
  std::size_t t = 0;
  Index action = 0;
  Index observation = 0;
  std::vector<double> posterior;
  std::vector<double> likelihoods;
  double entropy = 0.0;
};

inline TraceRecord make_trace_record(const PosteriorState& s, Index a, Index z) {
  return {s.t, a, z, s.posterior, s.likelihoods, s.entropy()};
}

/// Header: t,a,z,p_0..p_{K-1},rho_0..rho_{K-1},entropy
inline void write_trace_header(std::ostream& os, std::size_t num_models) {
  os << "t,a,z";
  for (std::size_t k = 0; k < num_models; ++k) os << ",p_" << k;
  for (std::size_t k = 0; k < num_models; ++k) os << ",rho_" << k;
  os << ",entropy\n";
}

inline void write_trace_row(std::ostream& os, const TraceRecord& r) {
  os << r.t << ',' << r.action << ',' << r.observation;
  for (double p : r.posterior) os << ',' << format_real(p);
  for (double l : r.likelihoods) os << ',' << format_real(l);
  os << ',' << format_real(r.entropy) << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, std::size_t num_models) {
  write_trace_header(os, num_models);
  for (const auto& r : trace) write_trace_row(os, r);
}

}  // namespace atpo
