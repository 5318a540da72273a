#pragma once

// Time-sliced configuration ensemble: N differently configured provers share a total
// budget T, each branch gets T/N, and a problem counts as solved when any branch
// refutes it.

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "saturn/prover.hpp"

namespace saturn {

enum class BudgetMode { Seconds, Steps };

const char* to_string(BudgetMode mode);

struct EnsembleSpec {
  std::size_t branches = 4;
  double total_budget = 100.0;  // seconds, or given-clause steps in Steps mode
  BudgetMode mode = BudgetMode::Seconds;
  std::vector<ProverConfig> configs;  // one per branch

  void validate() const;
};

/// Enumerates (literal selection x tie break) in the order
///   all/age, negative_only/age, max_weight/age, all/weight, negative_only/weight,
///   max_weight/weight
/// and wraps around with seed base_seed + round for n > 6. Throws ConfigError for n == 0.
std::vector<ProverConfig> make_configs(std::size_t n, std::uint64_t base_seed = 0);

/// Per-branch budgets summing to exactly `total`. Seconds mode splits evenly; Steps mode
/// gives floor(T/N) to every branch and hands the remainder out one step at a time from
/// the first branch on.
std::vector<double> branch_budgets(std::size_t branches, double total, BudgetMode mode);

/// The branch config with its budget applied as the time or step limit.
ProverConfig with_budget(ProverConfig config, double budget, BudgetMode mode);

struct BranchOutcome {
  std::string problem;
  std::size_t branch = 0;
  ProofStatus status = ProofStatus::Incomplete;
  std::size_t steps = 0;
  double time_ms = 0.0;
};

struct EnsembleResult {
  std::vector<double> budgets;
  std::vector<std::vector<BranchOutcome>> branches;  // [branch][problem]
  std::set<std::string> solved_union;

  std::set<std::string> solved_by(std::size_t branch) const;
};

/// Exact union of problems with an Unsatisfiable outcome in any branch.
std::set<std::string> union_solved(const std::vector<std::vector<BranchOutcome>>& branches);

/// Runs every branch over every problem. `models` is empty (heuristic guidance
/// everywhere) or holds one entry per branch, where a null entry also means heuristic
/// guidance. Branches run on separate threads when `parallel` is set.
EnsembleResult run_ensemble(std::span<const Problem> problems, const EnsembleSpec& spec,
                            std::span<const ModelParams* const> models = {}, bool parallel = true);

/// CSV rows `problem,branch,status,steps,time_ms` followed by `#`-prefixed summary lines.
void write_report(std::ostream& out, const EnsembleResult& result, std::size_t problem_count, BudgetMode mode);

}  // namespace saturn
