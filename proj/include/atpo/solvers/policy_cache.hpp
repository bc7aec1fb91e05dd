#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "atpo/solvers/perseus.hpp"

namespace atpo {

/// On-disk store of solved policies, one file per (model content, solver
/// settings) pair. A default-constructed cache is disabled and always solves.
class PolicyCache {
 public:
  PolicyCache() = default;
  explicit PolicyCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  /// $ATPO_CACHE_DIR if set, else `fallback`.
  static std::filesystem::path resolve_dir(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("ATPO_CACHE_DIR"); env && *env) return env;
    return fallback;
  }

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& dir() const { return dir_; }

  static std::uint64_t key(const TabularPomdp& m, const PerseusSettings& s) {
    return splitmix64(m.content_hash() ^ fnv1a(s.key()));
  }

  std::filesystem::path path_for(const TabularPomdp& m, const PerseusSettings& s) const {
    return dir_ / (hex64(key(m, s)) + ".policy");
  }

  std::optional<AlphaVectorPolicy> load(const TabularPomdp& m, const PerseusSettings& s) const {
    if (!enabled()) return std::nullopt;
    std::ifstream is(path_for(m, s));
    if (!is) return std::nullopt;
    try {
      auto p = read_policy(is);
      if (p.info().model_hash != m.content_hash() || p.info().settings.key() != s.key() ||
          p.num_states() != m.num_states())
        return std::nullopt;
      return p;
    } catch (const FormatError&) {
      return std::nullopt;
    }
  }

  void store(const TabularPomdp& m, const PerseusSettings& s, const AlphaVectorPolicy& p) const {
    if (!enabled()) return;
    std::filesystem::create_directories(dir_);
    const auto target = path_for(m, s);
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream os(tmp);
      if (!os) throw Error("cannot write policy file " + tmp.string());
      write_policy(os, p);
    }
    std::filesystem::rename(tmp, target);
  }

  AlphaVectorPolicy get_or_solve(const TabularPomdp& m, const PerseusSettings& s, bool* hit = nullptr) const {
    if (auto cached = load(m, s)) {
      if (hit) *hit = true;
      return std::move(*cached);
    }
    if (hit) *hit = false;
    auto p = perseus_solve(m, s);
    store(m, s, p);
    return p;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace atpo
