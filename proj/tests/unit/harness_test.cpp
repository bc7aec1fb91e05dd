#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "atpo/harness/experiment.hpp"
#include "atpo/harness/reports.hpp"

using namespace atpo;

namespace {

const PreparedDomain& small_gridworld() {
  static const PreparedDomain p = [] {
    DomainSpec s = desk_spec("gridworld");
    s.width = s.height = 3;
    s.library_size = 3;
    s.horizon = 25;
    s.perseus.horizon = 25;
    s.perseus.belief_set_size = 300;
    return prepare_domain(s);
  }();
  return p;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto d = std::filesystem::path(::testing::TempDir()) / ("atpo-harness-" + name);
  std::filesystem::remove_all(d);
  return d;
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  return line;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) ++n;
  return n;
}

bool same_real(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

TrialResult fake_trial(const std::string& agent, std::uint64_t seed, double ret) {
  TrialResult t;
  t.agent = agent;
  t.seed = seed;
  t.total_return = ret;
  return t;
}

}  // namespace

TEST(Trials, SameSeedSameOutcome) {
  const auto& p = small_gridworld();
  for (const auto& agent : agent_names()) {
    const auto a = run_trial(p, agent, 4);
    const auto b = run_trial(p, agent, 4);
    EXPECT_TRUE(a.same_outcome(b)) << agent;
    EXPECT_EQ(a.actions.size(), p.spec.horizon);
  }
  EXPECT_FALSE(run_trial(p, "atpo", 4).same_outcome(run_trial(p, "atpo", 5)));
}

TEST(Trials, AgentsFaceTheSameEnvironmentDraws) {
  const auto& p = small_gridworld();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ref = run_trial(p, "random", seed);
    for (const auto& agent : agent_names()) {
      const auto t = run_trial(p, agent, seed);
      EXPECT_EQ(t.true_model, ref.true_model);
      EXPECT_EQ(t.initial_state, ref.initial_state);
    }
  }
}

TEST(Trials, ReturnIsTheSumOfRewards) {
  const auto t = run_trial(small_gridworld(), "vi", 2);
  double s = 0.0;
  for (double r : t.rewards) s += r;
  EXPECT_DOUBLE_EQ(t.total_return, s);
}

TEST(Trials, BayesianAgentsRecordTracesAndPassTheBound) {
  const auto& p = small_gridworld();
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto t = run_trial(p, "atpo", seed);
    ASSERT_EQ(t.trace.size(), p.spec.horizon);
    ASSERT_TRUE(t.bound.has_value());
    EXPECT_FALSE(t.bound->violated);
    EXPECT_EQ(t.bound_steps.size(), p.spec.horizon);
  }
  const auto r = run_trial(p, "random", 1);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_FALSE(r.bound.has_value());
}

TEST(Trials, RandomAgentOnSingleActionDomain) {
  PomdpBuilder b(2, 1, 1);
  b.discount(0.9);
  b.add_transition(0, 0, 1, 1.0);
  b.add_transition(0, 1, 0, 1.0);
  b.add_observation(0, 0, 0, 1.0);
  b.add_observation(0, 1, 0, 1.0);
  b.set_reward(0, 0, 1.0);
  std::vector<TabularPomdp> models;
  models.push_back(std::move(b).build());
  std::vector<AlphaVectorPolicy> policies{AlphaVectorPolicy({{{0.0, 0.0}, 0}}, 2, "zero")};
  PreparedDomain p;
  p.spec.horizon = 10;
  p.library = std::make_shared<const ModelLibrary>(std::move(models), std::move(policies));
  p.mdp_values = solve_induced_mdps(*p.library);
  const auto t = run_trial(p, "random", 3);
  EXPECT_EQ(t.actions, std::vector<Index>(10, 0));
  EXPECT_DOUBLE_EQ(t.total_return, 5.0);
}

TEST(Summaries, SingleTrialHasZeroStd) {
  const auto t = fake_trial("x", 1, 42.0);
  const auto s = summarize("x", {&t});
  EXPECT_EQ(s.trials, 1u);
  EXPECT_DOUBLE_EQ(s.mean_return, 42.0);
  EXPECT_DOUBLE_EQ(s.std_return, 0.0);
  EXPECT_TRUE(std::isnan(s.p_true_median[2]));
}

TEST(Summaries, SampleStatistics) {
  EXPECT_DOUBLE_EQ(stddev_of({1.0, 2.0, 3.0, 4.0}), std::sqrt(5.0 / 3.0));
  EXPECT_DOUBLE_EQ(median_of({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median_of({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_TRUE(std::isnan(mean_of({})));
  EXPECT_DOUBLE_EQ(normalized_score(50.0, 100.0, 0.0), 0.5);
  EXPECT_TRUE(std::isnan(normalized_score(1.0, 2.0, 2.0)));
  EXPECT_TRUE(identifies({0.2, 0.5, 0.3}, 1));
  EXPECT_FALSE(identifies({0.5, 0.5}, 0));
}

TEST(Summaries, IndependentOfTrialOrder) {
  const auto& p = small_gridworld();
  std::vector<TrialResult> trials;
  for (std::uint64_t seed = 1; seed <= 9; ++seed) trials.push_back(run_trial(p, "atpo", seed));
  std::vector<const TrialResult*> ptrs;
  for (const auto& t : trials) ptrs.push_back(&t);
  const auto a = summarize("atpo", ptrs);
  std::shuffle(ptrs.begin(), ptrs.end(), std::mt19937_64(3));
  const auto b = summarize("atpo", ptrs);
  EXPECT_EQ(a.mean_return, b.mean_return);
  EXPECT_EQ(a.std_return, b.std_return);
  EXPECT_EQ(a.p_true_median, b.p_true_median);
  EXPECT_EQ(a.entropy_mean, b.entropy_mean);
  EXPECT_EQ(a.identified_trials, b.identified_trials);
}

TEST(Summaries, IdentificationCounts) {
  TrialResult t = fake_trial("atpo", 1, 0.0);
  t.true_model = 1;
  for (int i = 0; i < 20; ++i) {
    TraceRecord r;
    r.t = static_cast<std::size_t>(i + 1);
    r.posterior = i < 6 ? std::vector<double>{0.6, 0.4} : std::vector<double>{0.1, 0.9};
    t.trace.push_back(r);
  }
  const auto s = summarize("atpo", {&t});
  EXPECT_EQ(s.identified_trials, 1u);
  EXPECT_DOUBLE_EQ(s.first_identified_mean, 7.0);
  EXPECT_DOUBLE_EQ(s.identified_by_fraction[0], 0.0);
  EXPECT_DOUBLE_EQ(s.identified_by_fraction[1], 1.0);
  EXPECT_DOUBLE_EQ(s.argmax_fraction[0], 0.0);
  EXPECT_DOUBLE_EQ(s.p_true_median[2], 0.9);
}

TEST(Experiments, OracleAndRandomAnchorTheScale) {
  const auto rep = run_experiment(small_gridworld(), {"vi", "random", "atpo"}, 6, 1);
  EXPECT_DOUBLE_EQ(rep.find("vi")->normalized, 1.0);
  EXPECT_DOUBLE_EQ(rep.find("random")->normalized, 0.0);
  EXPECT_GT(rep.find("vi")->mean_return, rep.find("random")->mean_return);
  EXPECT_EQ(rep.trials.size(), 18u);
  EXPECT_EQ(rep.model_labels.size(), 3u);
}

TEST(Experiments, WorkerCountDoesNotChangeResults) {
  const auto a = run_experiment(small_gridworld(), {"atpo", "random-picker"}, 5, 10, {.workers = 1});
  const auto b = run_experiment(small_gridworld(), {"atpo", "random-picker"}, 5, 10, {.workers = 3});
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_TRUE(a.trials[i].same_outcome(b.trials[i]));
}

TEST(Experiments, UnsupportedAgentsAreRejectedOrSkipped) {
  DomainSpec s = desk_spec("power-plant");
  s.perseus.belief_set_size = 50;
  s.horizon = s.perseus.horizon = 10;
  const auto p = prepare_domain(s);
  EXPECT_THROW(run_experiment(p, {"atpo", "bopa"}, 2, 1), ConfigurationError);
  EXPECT_THROW(run_trial(p, "bopa", 1), ConfigurationError);
  const auto rep = run_experiment(p, {"atpo", "bopa"}, 2, 1, {.skip_unsupported = true});
  EXPECT_EQ(rep.skipped_agents, std::vector<std::string>{"bopa"});
  ASSERT_EQ(rep.agents.size(), 1u);
  EXPECT_THROW(run_experiment(p, {"nobody"}, 2, 1), ConfigurationError);
}

TEST(Experiments, SignTest) {
  EXPECT_DOUBLE_EQ(sign_test_p(0, 5), 1.0);
  EXPECT_NEAR(sign_test_p(5, 5), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(sign_test_p(3, 5), 0.5, 1e-15);
  EXPECT_NEAR(sign_test_p(4, 5), 6.0 / 32.0, 1e-15);
}

TEST(WorkerPool, RethrowsAndCoversEveryIndex) {
  std::vector<int> hit(50, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 50);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Reports, SummaryHeaderIsStable) {
  EXPECT_EQ(join_csv(summary_columns()),
            "agent,trials,mean_return,std_return,normalized,identified_trials,first_identified_mean,"
            "p_true_mean_t5,p_true_mean_t10,p_true_mean_t20,p_true_median_t5,p_true_median_t10,p_true_median_t20,"
            "argmax_t5,argmax_t10,argmax_t20,identified_by_t5,identified_by_t10,identified_by_t20,bound_checked,"
            "bound_violations");
  EXPECT_EQ(split_csv("a,,b,"), (std::vector<std::string>{"a", "", "b", ""}));
}

TEST(Reports, RoundTripThroughFiles) {
  const auto rep = run_experiment(small_gridworld(), {"atpo", "vi", "random"}, 4, 7);
  const auto dir = fresh_dir("roundtrip");
  emit_reports(rep, dir);
  const auto back = read_summaries(dir);
  ASSERT_EQ(back.size(), rep.agents.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto &a = rep.agents[i], &b = back[i];
    EXPECT_EQ(a.agent, b.agent);
    EXPECT_EQ(a.trials, b.trials);
    EXPECT_TRUE(same_real(a.mean_return, b.mean_return));
    EXPECT_TRUE(same_real(a.std_return, b.std_return));
    EXPECT_TRUE(same_real(a.normalized, b.normalized));
    EXPECT_TRUE(same_real(a.first_identified_mean, b.first_identified_mean));
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_TRUE(same_real(a.p_true_median[j], b.p_true_median[j]));
      EXPECT_TRUE(same_real(a.identified_by_fraction[j], b.identified_by_fraction[j]));
    }
    EXPECT_EQ(a.entropy_mean, b.entropy_mean);
    EXPECT_EQ(a.bound_violations, b.bound_violations);
  }
  EXPECT_EQ(first_line(dir / "trials.csv"), "agent,seed,true_model,steps,return");
  EXPECT_EQ(line_count(dir / "trials.csv"), 13u);
  EXPECT_TRUE(std::filesystem::exists(dir / "traces" / "atpo-7.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "traces" / "vi-7.csv"));

  std::ifstream mf(dir / "manifest.json");
  const auto manifest = nlohmann::json::parse(mf);
  EXPECT_EQ(manifest.at("format"), "atpo-report");
  EXPECT_EQ(manifest.at("num_trials"), 4);
  EXPECT_EQ(manifest.at("models").size(), 3u);
  EXPECT_EQ(manifest.at("spec").at("domain"), "gridworld");
}

TEST(Reports, EmptyReportWritesHeadersOnly) {
  const auto dir = fresh_dir("empty");
  emit_reports(ExperimentReport{}, dir);
  EXPECT_EQ(line_count(dir / "summary.csv"), 1u);
  EXPECT_EQ(line_count(dir / "trials.csv"), 1u);
  EXPECT_EQ(line_count(dir / "entropy.csv"), 1u);
  EXPECT_TRUE(read_summaries(dir).empty());
}

TEST(Reports, RejectsForeignFiles) {
  const auto dir = fresh_dir("foreign");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "summary.csv") << "who,what\n";
  std::ofstream(dir / "entropy.csv") << "agent,t,mean_entropy\n";
  EXPECT_THROW(read_summaries(dir), FormatError);
}
