#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "generators.hpp"
#include "saturn/ensemble.hpp"
#include "saturn/error.hpp"

using namespace saturn;
namespace gen = saturn::testing;

namespace {

std::vector<Problem> chain(std::size_t n) { return gen::chain_corpus(n, 9); }

}  // namespace

TEST(MakeConfigs, SingleBranch) {
  const auto c = make_configs(1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].literal_selection, LiteralSelection::All);
  EXPECT_EQ(c[0].tie_break, TieBreak::Age);
}

TEST(MakeConfigs, FourDistinctCoverSelections) {
  const auto c = make_configs(4);
  ASSERT_EQ(c.size(), 4u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) EXPECT_NE(c[i], c[j]);
  }
  for (auto sel : {LiteralSelection::All, LiteralSelection::NegativeOnly, LiteralSelection::MaxWeight}) {
    EXPECT_TRUE(std::any_of(c.begin(), c.end(), [&](const ProverConfig& x) { return x.literal_selection == sel; }));
  }
}

TEST(MakeConfigs, WrapsWithFreshSeeds) {
  const auto c = make_configs(10, 100);
  ASSERT_EQ(c.size(), 10u);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      EXPECT_FALSE(c[i].literal_selection == c[j].literal_selection && c[i].tie_break == c[j].tie_break);
    }
  }
  for (std::size_t i = 6; i < 10; ++i) {
    EXPECT_EQ(c[i].literal_selection, c[i - 6].literal_selection);
    EXPECT_EQ(c[i].tie_break, c[i - 6].tie_break);
    EXPECT_NE(c[i].seed, c[i - 6].seed);
  }
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = i + 1; j < 10; ++j) EXPECT_NE(c[i], c[j]);
  }
  EXPECT_THROW(make_configs(0), ConfigError);
}

TEST(Budgets, FourWaySplit) {
  EXPECT_EQ(branch_budgets(4, 100.0, BudgetMode::Seconds), (std::vector<double>{25.0, 25.0, 25.0, 25.0}));
  EXPECT_EQ(branch_budgets(4, 100.0, BudgetMode::Steps), (std::vector<double>{25.0, 25.0, 25.0, 25.0}));
}

TEST(BudgetsProperty, ConservedExactly) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng.below(12);
    const double steps = static_cast<double>(n + rng.below(1000));
    const auto b = branch_budgets(n, steps, BudgetMode::Steps);
    EXPECT_EQ(std::accumulate(b.begin(), b.end(), 0.0), steps);
    const double lo = std::floor(steps / static_cast<double>(n));
    for (double x : b) EXPECT_TRUE(x == lo || x == lo + 1.0);
    const auto s = branch_budgets(n, 60.0, BudgetMode::Seconds);
    for (double x : s) EXPECT_LE(x, 60.0 / static_cast<double>(n));
  }
}

TEST(WithBudget, SetsTheRightLimit) {
  const ProverConfig s = with_budget({}, 25.0, BudgetMode::Seconds);
  EXPECT_EQ(s.time_limit, 25.0);
  const ProverConfig t = with_budget({}, 25.0, BudgetMode::Steps);
  EXPECT_EQ(t.step_limit, 25u);
  EXPECT_TRUE(std::isinf(t.time_limit));
}

TEST(Union, ExactSetUnion) {
  std::vector<std::vector<BranchOutcome>> branches(2);
  branches[0] = {{"a", 0, ProofStatus::Unsatisfiable}, {"b", 0, ProofStatus::Unsatisfiable}, {"c", 0, ProofStatus::StepLimit}};
  branches[1] = {{"a", 1, ProofStatus::Saturated}, {"b", 1, ProofStatus::Unsatisfiable}, {"c", 1, ProofStatus::Unsatisfiable}};
  EXPECT_EQ(union_solved(branches), (std::set<std::string>{"a", "b", "c"}));
}

TEST(UnionProperty, DominatesEveryBranch) {
  Rng rng(11);
  const std::vector<ProofStatus> statuses{ProofStatus::Unsatisfiable, ProofStatus::Saturated, ProofStatus::Timeout,
                                          ProofStatus::StepLimit};
  for (int run = 0; run < 200; ++run) {
    EnsembleResult r;
    const std::size_t n = 1 + rng.below(6), problems = 1 + rng.below(30);
    r.branches.resize(n);
    std::set<std::string> oracle;
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t p = 0; p < problems; ++p) {
        const auto s = statuses[rng.below(statuses.size())];
        r.branches[b].push_back({"p" + std::to_string(p), b, s});
        if (s == ProofStatus::Unsatisfiable) oracle.insert("p" + std::to_string(p));
      }
    }
    r.solved_union = union_solved(r.branches);
    EXPECT_EQ(r.solved_union, oracle);
    for (std::size_t b = 0; b < n; ++b) EXPECT_GE(r.solved_union.size(), r.solved_by(b).size());
  }
}

TEST(RunEnsemble, StepModeBudgetsAndUnion) {
  const auto problems = chain(12);
  EnsembleSpec spec;
  spec.branches = 4;
  spec.total_budget = 100;
  spec.mode = BudgetMode::Steps;
  spec.configs = make_configs(4);
  const EnsembleResult r = run_ensemble(problems, spec);
  EXPECT_EQ(r.budgets, (std::vector<double>{25.0, 25.0, 25.0, 25.0}));
  ASSERT_EQ(r.branches.size(), 4u);
  std::size_t best = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    ASSERT_EQ(r.branches[b].size(), problems.size());
    for (const auto& o : r.branches[b]) EXPECT_LE(o.steps, 25u);
    best = std::max(best, r.solved_by(b).size());
  }
  EXPECT_GE(r.solved_union.size(), best);
  EXPECT_EQ(r.solved_union, union_solved(r.branches));
}

TEST(RunEnsemble, SingleBranchEqualsPlainRun) {
  const auto problems = chain(6);
  EnsembleSpec spec;
  spec.branches = 1;
  spec.total_budget = 30;
  spec.mode = BudgetMode::Steps;
  spec.configs = make_configs(1);
  const EnsembleResult r = run_ensemble(problems, spec);
  for (std::size_t i = 0; i < problems.size(); ++i) {
    ProverConfig cfg;
    cfg.step_limit = 30;
    const ProofResult direct = saturate(problems[i], cfg);
    EXPECT_EQ(r.branches[0][i].status, direct.status);
    EXPECT_EQ(r.branches[0][i].steps, direct.stats.steps);
  }
}

TEST(RunEnsemble, ParallelEqualsSequentialAndOrderIndependent) {
  const auto problems = chain(10);
  EnsembleSpec spec;
  spec.branches = 3;
  spec.total_budget = 60;
  spec.mode = BudgetMode::Steps;
  spec.configs = make_configs(3);
  const ModelParams m = init_params(8, 1);
  const std::vector<const ModelParams*> models{&m, nullptr, &m};
  const EnsembleResult a = run_ensemble(problems, spec, models, true);
  const EnsembleResult b = run_ensemble(problems, spec, models, false);

  EnsembleSpec reversed = spec;
  std::reverse(reversed.configs.begin(), reversed.configs.end());
  const std::vector<const ModelParams*> rmodels{&m, nullptr, &m};
  const EnsembleResult c = run_ensemble(problems, reversed, rmodels, true);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < problems.size(); ++i) {
      EXPECT_EQ(a.branches[k][i].status, b.branches[k][i].status);
      EXPECT_EQ(a.branches[k][i].steps, b.branches[k][i].steps);
      EXPECT_EQ(a.branches[k][i].status, c.branches[2 - k][i].status);
      EXPECT_EQ(a.branches[k][i].steps, c.branches[2 - k][i].steps);
    }
  }
  EXPECT_EQ(a.solved_union, c.solved_union);
}

TEST(RunEnsemble, RejectsBadSpecs) {
  const auto problems = chain(1);
  EnsembleSpec spec;
  spec.branches = 2;
  spec.configs = make_configs(3);
  EXPECT_THROW(run_ensemble(problems, spec), ConfigError);
  spec.configs = make_configs(2);
  spec.total_budget = 0;
  EXPECT_THROW(run_ensemble(problems, spec), ConfigError);
  spec.total_budget = 10;
  const std::vector<const ModelParams*> one{nullptr};
  EXPECT_THROW(run_ensemble(problems, spec, one), ConfigError);
}

TEST(Report, CsvAndSummary) {
  const auto problems = chain(4);
  EnsembleSpec spec;
  spec.branches = 4;
  spec.total_budget = 100;
  spec.mode = BudgetMode::Steps;
  spec.configs = make_configs(4);
  const EnsembleResult r = run_ensemble(problems, spec);
  std::ostringstream out;
  write_report(out, r, problems.size(), spec.mode);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("problem,branch,status,steps,time_ms\n", 0), 0u);
  EXPECT_NE(text.find("# branch 0: budget=25 steps"), std::string::npos) << text;
  EXPECT_NE(text.find("# union: solved="), std::string::npos);
  const auto rows = std::count(text.begin(), text.end(), '\n');
  EXPECT_EQ(rows, 1 + 16 + 4 + 1);
}
