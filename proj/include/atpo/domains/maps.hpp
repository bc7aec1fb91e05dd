#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "atpo/core/errors.hpp"
#include "atpo/domains/grid_navigation.hpp"

namespace atpo {

/// A navigation map file:
///
///   name <id>
///   size <width> <height>
///   goal <c1> <r1> <c2> <r2>      one line per task
///   grid
///   <height rows of width characters: '#' wall, '.' free>
struct NavigationMap {
  std::string name;
  GridLayout layout;
  std::vector<std::array<int, 2>> goals;  // cell indices
};

inline NavigationMap parse_map(std::istream& is) {
  NavigationMap m;
  int w = 0, h = 0;
  std::vector<std::array<int, 4>> raw_goals;
  std::string line;
  bool grid = false;
  std::vector<std::string> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (grid) {
      if (!line.empty()) rows.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "name") {
      ls >> m.name;
    } else if (key == "size") {
      ls >> w >> h;
    } else if (key == "goal") {
      std::array<int, 4> g{};
      if (!(ls >> g[0] >> g[1] >> g[2] >> g[3])) throw FormatError("map: malformed goal line '" + line + "'");
      raw_goals.push_back(g);
    } else if (key == "grid") {
      grid = true;
    } else {
      throw FormatError("map: unknown key '" + key + "'");
    }
    if (ls.fail()) throw FormatError("map: malformed line '" + line + "'");
  }
  if (w < 1 || h < 1) throw FormatError("map: missing size");
  if (static_cast<int>(rows.size()) != h) throw FormatError("map: expected " + std::to_string(h) + " grid rows");
  std::vector<char> free(static_cast<std::size_t>(w * h), 0);
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[r].size()) != w) throw FormatError("map: row " + std::to_string(r) + " has wrong width");
    for (int c = 0; c < w; ++c) {
      const char ch = rows[r][c];
      if (ch != '#' && ch != '.') throw FormatError(std::string("map: unknown cell character '") + ch + "'");
      free[c * h + r] = ch == '.';
    }
  }
  m.layout = GridLayout(w, h, std::move(free));
  for (const auto& g : raw_goals) {
    for (int i = 0; i < 4; i += 2)
      if (g[i] < 0 || g[i] >= w || g[i + 1] < 0 || g[i + 1] >= h || !m.layout.is_free(m.layout.cell(g[i], g[i + 1])))
        throw FormatError("map: goal is not a free cell");
    m.goals.push_back({m.layout.cell(g[0], g[1]), m.layout.cell(g[2], g[3])});
  }
  if (m.goals.empty()) throw FormatError("map: no goals");
  return m;
}

inline NavigationMap load_map(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("map: cannot open '" + path + "'");
  return parse_map(f);
}

}  // namespace atpo
