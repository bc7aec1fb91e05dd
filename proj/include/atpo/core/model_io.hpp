#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "atpo/core/pomdp.hpp"

namespace atpo {

// Text model format, version 1:
//
//   atpo-pomdp 1
//   label <rest of line>
//   states <n>  actions <n>  observations <n>     (one keyword per line)
//   discount <g>
//   T <count>      followed by <count> lines "a x y p"
//   O <count>      followed by <count> lines "a y z p"
//   R <count>      followed by <count> lines "x a r"   (omitted entries are 0)
//   b0 <count>     followed by <count> lines "x p"
//   end
//
// Reals are written with 17 significant digits, so write -> read reproduces
// every double bit for bit.

inline constexpr int kModelFormatVersion = 1;

inline std::string format_real(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw FormatError("malformed real '" + s + "'");
  return v;
}

inline void write_model(std::ostream& os, const TabularPomdp& m) {
  os << "atpo-pomdp " << kModelFormatVersion << "\n";
  os << "label " << m.label() << "\n";
  os << "states " << m.num_states() << "\n";
  os << "actions " << m.num_actions() << "\n";
  os << "observations " << m.num_observations() << "\n";
  os << "discount " << format_real(m.discount()) << "\n";

  auto dump_rows = [&](const char* tag, bool transitions) {
    std::ostringstream body;
    std::size_t count = 0;
    for (Index a = 0; a < m.num_actions(); ++a)
      for (Index x = 0; x < m.num_states(); ++x) {
        auto row = transitions ? m.transition(a, x) : m.observation(a, x);
        row.for_each([&](Index c, double p) {
          body << a << ' ' << x << ' ' << c << ' ' << format_real(p) << '\n';
          ++count;
        });
      }
    os << tag << ' ' << count << '\n' << body.str();
  };
  dump_rows("T", true);
  dump_rows("O", false);

  std::ostringstream rbody;
  std::size_t rcount = 0;
  for (Index x = 0; x < m.num_states(); ++x)
    for (Index a = 0; a < m.num_actions(); ++a)
      if (m.reward(x, a) != 0.0) {
        rbody << x << ' ' << a << ' ' << format_real(m.reward(x, a)) << '\n';
        ++rcount;
      }
  os << "R " << rcount << '\n' << rbody.str();

  std::ostringstream bbody;
  std::size_t bcount = 0;
  for (Index x = 0; x < m.num_states(); ++x)
    if (m.initial_belief()[x] != 0.0) {
      bbody << x << ' ' << format_real(m.initial_belief()[x]) << '\n';
      ++bcount;
    }
  os << "b0 " << bcount << '\n' << bbody.str();
  os << "end\n";
}

inline TabularPomdp read_model(std::istream& is, std::size_t sparse_threshold = kDefaultSparseThreshold) {
  std::string line;
  auto next_line = [&]() -> std::string {
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') return line;
    }
    throw FormatError("unexpected end of model file");
  };
  auto keyword = [&](const std::string& l, const std::string& key) -> std::string {
    if (l.compare(0, key.size() + 1, key + " ") != 0) throw FormatError("expected '" + key + "', got '" + l + "'");
    return l.substr(key.size() + 1);
  };
  auto count_of = [&](const std::string& key) { return std::stoull(keyword(next_line(), key)); };

  const std::string header = next_line();
  if (header != "atpo-pomdp " + std::to_string(kModelFormatVersion))
    throw FormatError("unsupported model header '" + header + "'");
  std::string label = keyword(next_line(), "label");
  const std::size_t ns = count_of("states");
  const std::size_t na = count_of("actions");
  const std::size_t nz = count_of("observations");
  const double discount = parse_real(keyword(next_line(), "discount"));

  PomdpBuilder b(ns, na, nz);
  b.label(std::move(label)).discount(discount);

  auto read_triples = [&](const std::string& key, auto&& sink, std::size_t lim1, std::size_t lim2, std::size_t lim3) {
    const std::size_t n = count_of(key);
    for (std::size_t i = 0; i < n; ++i) {
      std::istringstream ls(next_line());
      std::size_t i1, i2, i3;
      std::string p;
      if (!(ls >> i1 >> i2 >> i3 >> p)) throw FormatError("malformed " + key + " entry: '" + line + "'");
      if (i1 >= lim1 || i2 >= lim2 || i3 >= lim3) throw FormatError(key + " index out of range: '" + line + "'");
      sink(static_cast<Index>(i1), static_cast<Index>(i2), static_cast<Index>(i3), parse_real(p));
    }
  };
  read_triples("T", [&](Index a, Index x, Index y, double p) { b.add_transition(a, x, y, p); }, na, ns, ns);
  read_triples("O", [&](Index a, Index y, Index z, double p) { b.add_observation(a, y, z, p); }, na, ns, nz);

  const std::size_t nr = count_of("R");
  for (std::size_t i = 0; i < nr; ++i) {
    std::istringstream ls(next_line());
    std::size_t x, a;
    std::string r;
    if (!(ls >> x >> a >> r) || x >= ns || a >= na) throw FormatError("malformed R entry: '" + line + "'");
    b.set_reward(static_cast<Index>(x), static_cast<Index>(a), parse_real(r));
  }
  const std::size_t nb = count_of("b0");
  std::vector<double> b0(ns, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    std::istringstream ls(next_line());
    std::size_t x;
    std::string p;
    if (!(ls >> x >> p) || x >= ns) throw FormatError("malformed b0 entry: '" + line + "'");
    b0[x] = parse_real(p);
  }
  b.initial_belief(Belief(std::move(b0)));
  if (next_line() != "end") throw FormatError("missing 'end' marker");
  return std::move(b).build(sparse_threshold);
}

inline void save_model(const std::string& path, const TabularPomdp& m) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write model file " + path);
  write_model(os, m);
}

inline TabularPomdp load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open model file " + path);
  return read_model(is);
}

}  // namespace atpo
