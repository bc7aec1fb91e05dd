#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "atpo/core/model_io.hpp"
#include "atpo/domains/domain_spec.hpp"
#include "atpo/harness/experiment.hpp"
#include "atpo/harness/reports.hpp"

namespace {

using namespace atpo;

/// Where a command gets its domain from, plus common overrides.
struct SpecArgs {
  std::string spec_file;
  std::string domain;
  std::string scale = "desk";
  std::optional<std::size_t> library_size;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> beliefs;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> task_seed;

  void add_to(CLI::App* app) {
    auto* spec = app->add_option("--spec", spec_file, "Domain spec file (JSON)")->check(CLI::ExistingFile);
    auto* dom = app->add_option("--domain", domain, "Named domain")
                    ->check(CLI::IsMember(domain_names()))
                    ->excludes(spec);
    app->add_option("--scale", scale, "Defaults for --domain: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->needs(dom);
    app->add_option("--library-size", library_size, "Number of hypotheses");
    app->add_option("--horizon", horizon, "Episode length (also the Perseus collection horizon)");
    app->add_option("--beliefs", beliefs, "Perseus belief set size");
    app->add_option("--epsilon", epsilon, "Noise level");
    app->add_option("--task-seed", task_seed, "Seed for the gridworld task order");
  }

  bool given() const { return !spec_file.empty() || !domain.empty(); }

  DomainSpec resolve() const {
    DomainSpec s;
    if (!spec_file.empty())
      s = load_spec(spec_file);
    else if (!domain.empty())
      s = scale == "paper" ? paper_spec(domain) : desk_spec(domain);
    else
      throw ConfigurationError("one of --spec or --domain is required");
    if (library_size) {
      s.library_size = *library_size;
      s.tasks.clear();
    }
    if (horizon) s.horizon = s.perseus.horizon = *horizon;
    if (beliefs) s.perseus.belief_set_size = *beliefs;
    if (epsilon) s.epsilon = *epsilon;
    if (task_seed) s.seed = *task_seed;
    validate_spec(s);
    return s;
  }
};

struct RunArgs {
  std::string cache_dir;
  std::size_t workers = 1;

  void add_to(CLI::App* app) {
    app->add_option("--cache-dir", cache_dir, "Policy cache directory (default: $ATPO_CACHE_DIR or ./atpo-cache)");
    app->add_option("--workers", workers, "Worker threads (0 = one per core)");
  }

  PrepareOptions prepare() const {
    PrepareOptions o;
    o.cache = PolicyCache(cache_dir.empty() ? PolicyCache::resolve_dir("atpo-cache") : std::filesystem::path(cache_dir));
    o.workers = workers;
    return o;
  }
};

void print_library(const PreparedDomain& p) {
  std::printf("%s: %zu models, setup %.2fs, solve %.2fs (%zu cached)\n", p.spec.domain.c_str(), p.library->size(),
              p.setup_seconds, p.solve_seconds, p.cache_hits);
  for (std::size_t k = 0; k < p.library->size(); ++k) {
    const auto& m = p.library->model(k);
    const auto& info = p.library->policy(k).info();
    std::printf("  [%zu] %-40s |X|=%-5zu vectors=%-5zu stages=%-4zu %s\n", k, m.label().c_str(), m.num_states(),
                p.library->policy(k).vectors().size(), info.stages, info.converged ? "converged" : "stage cap");
  }
}

void print_report(const ExperimentReport& r) {
  std::printf("\n%-14s %10s %10s %11s %10s %10s\n", "agent", "mean", "std", "normalized", "p(k*)@20", "first id");
  for (const auto& a : r.agents)
    std::printf("%-14s %10.2f %10.2f %10.1f%% %10.3f %10.2f\n", a.agent.c_str(), a.mean_return, a.std_return,
                100.0 * a.normalized, a.p_true_median[2], a.first_identified_mean);
  for (const auto& s : r.skipped_agents) std::printf("%-14s skipped: library has no common state space\n", s.c_str());
}

int cmd_solve(const SpecArgs& sa, const RunArgs& ra, const std::string& model_file) {
  auto prep = ra.prepare();
  if (!model_file.empty()) {
    const auto m = load_model(model_file);
    PerseusSettings s;
    if (sa.beliefs) s.belief_set_size = *sa.beliefs;
    if (sa.horizon) s.horizon = *sa.horizon;
    bool hit = false;
    const auto p = prep.cache.get_or_solve(m, s, &hit);
    std::printf("%s: %zu vectors, %zu stages%s -> %s\n", m.label().c_str(), p.vectors().size(), p.info().stages,
                hit ? " (cached)" : "", prep.cache.path_for(m, s).c_str());
    return 0;
  }
  print_library(prepare_domain(sa.resolve(), prep));
  return 0;
}

int cmd_run(const SpecArgs& sa, const RunArgs& ra, std::vector<std::string> agents, std::size_t trials,
            std::uint64_t seed, const std::string& out, const AgentOptions& ao, bool skip) {
  const auto p = prepare_domain(sa.resolve(), ra.prepare());
  print_library(p);
  if (agents.empty() || (agents.size() == 1 && agents[0] == "all")) agents = agent_names();
  ExperimentOptions eo;
  eo.trial.agent = ao;
  eo.workers = ra.workers;
  eo.skip_unsupported = skip;
  const auto rep = run_experiment(p, agents, trials, seed, eo);
  print_report(rep);
  if (!out.empty()) {
    emit_reports(rep, out);
    std::printf("\nreports written to %s\n", out.c_str());
  }
  return 0;
}

int cmd_scale(const SpecArgs& sa, const RunArgs& ra, const std::vector<std::size_t>& sizes, std::size_t trials,
              std::uint64_t seed, const std::string& out) {
  DomainSpec base = sa.given() ? sa.resolve() : desk_spec("gridworld");
  if (base.domain != "gridworld") throw ConfigurationError("scale runs on the gridworld domain");
  ExperimentOptions eo;
  eo.workers = ra.workers;
  const auto rows = run_library_scaling(base, sizes, trials, seed, ra.prepare(), eo);
  write_scaling_csv(std::cout, rows);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream os(std::filesystem::path(out) / "scaling.csv");
    write_scaling_csv(os, rows);
  }
  return 0;
}

int cmd_export(const SpecArgs& sa, const std::string& out) {
  const auto spec = sa.resolve();
  std::filesystem::create_directories(out);
  const auto models = build_models(spec);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto path = std::filesystem::path(out) / (spec.domain + "-" + std::to_string(k) + ".pomdp");
    save_model(path.string(), models[k]);
    std::printf("%s  %s\n", path.c_str(), models[k].label().c_str());
  }
  std::ofstream(std::filesystem::path(out) / "spec.json") << nlohmann::json(spec).dump(2) << "\n";
  return 0;
}

int cmd_validate(const SpecArgs& sa, const std::vector<std::string>& model_files) {
  std::vector<TabularPomdp> models;
  for (const auto& f : model_files) models.push_back(load_model(f));
  if (sa.given())
    for (auto& m : build_models(sa.resolve())) models.push_back(std::move(m));
  if (models.empty()) throw ConfigurationError("nothing to validate: give --model, --spec or --domain");
  std::size_t bad = 0;
  for (const auto& m : models) {
    const auto v = validate(m);
    std::printf("%-40s |X|=%zu |A|=%zu |Z|=%zu  %s\n", m.label().c_str(), m.num_states(), m.num_actions(),
                m.num_observations(), v.empty() ? "ok" : "INVALID");
    for (const auto& e : v) std::printf("    %s\n", e.message.c_str());
    bad += !v.empty();
  }
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ad hoc teamwork under partial observability: build, solve and evaluate model libraries"};
  app.require_subcommand(1);

  SpecArgs sa;
  RunArgs ra;

  auto* solve = app.add_subcommand("solve", "Solve a library (or one model file) into the policy cache");
  std::string model_file;
  sa.add_to(solve);
  ra.add_to(solve);
  solve->add_option("--model", model_file, "Model file in the text format")->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run seeded trials and report returns");
  std::vector<std::string> agents;
  std::size_t trials = 32;
  std::uint64_t seed = 1;
  std::string out;
  AgentOptions ao;
  bool skip = false;
  sa.add_to(run);
  ra.add_to(run);
  run->add_option("--agent", agents, "Agents to run, or 'all'")
      ->check(CLI::IsMember([] {
        auto v = agent_names();
        v.push_back("all");
        return v;
      }()));
  run->add_option("--trials", trials, "Trials per agent")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "First trial seed");
  run->add_option("--out", out, "Directory for CSV reports and the manifest");
  run->add_flag("--greedy-mixture", ao.atpo.greedy_mixture, "ATPO acts on the mode of its action mixture");
  run->add_option("--likelihood-floor", ao.atpo.likelihood_floor, "Floor instead of pruning zero-evidence models");
  run->add_flag("--bopa-argmax", ao.bopa_argmax, "BOPA acts with its most probable model");
  run->add_flag("--skip-unsupported", skip, "Leave out agents the library cannot support");

  auto* scale = app.add_subcommand("scale", "ATPO score as the gridworld library grows");
  std::vector<std::size_t> sizes{2, 4, 8};
  std::size_t scale_trials = 32;
  std::uint64_t scale_seed = 1;
  std::string scale_out;
  sa.add_to(scale);
  ra.add_to(scale);
  scale->add_option("--k", sizes, "Library sizes")->delimiter(',');
  scale->add_option("--trials", scale_trials, "Trials per library size")->check(CLI::PositiveNumber);
  scale->add_option("--seed", scale_seed, "First trial seed");
  scale->add_option("--out", scale_out, "Directory for scaling.csv");

  auto* exp = app.add_subcommand("export", "Write the compiled models of a domain");
  std::string export_out;
  sa.add_to(exp);
  exp->add_option("--out", export_out, "Output directory")->required();

  auto* val = app.add_subcommand("validate", "Check model files or a domain's models");
  std::vector<std::string> model_files;
  sa.add_to(val);
  val->add_option("--model", model_files, "Model files")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(sa, ra, model_file);
    if (*run) return cmd_run(sa, ra, agents, trials, seed, out, ao, skip);
    if (*scale) return cmd_scale(sa, ra, sizes, scale_trials, scale_seed, scale_out);
    if (*exp) return cmd_export(sa, export_out);
    if (*val) return cmd_validate(sa, model_files);
  } catch (const atpo::ConfigurationError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
