#include "saturn/ensemble.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "saturn/error.hpp"

namespace saturn {

const char* to_string(BudgetMode mode) { return mode == BudgetMode::Seconds ? "s" : "steps"; }

void EnsembleSpec::validate() const {
  if (branches == 0) throw ConfigError("ensemble needs at least one branch");
  if (!(total_budget > 0.0) || !std::isfinite(total_budget)) throw ConfigError("total budget must be positive");
  if (configs.size() != branches) throw ConfigError("ensemble needs one config per branch");
  if (mode == BudgetMode::Steps && total_budget < static_cast<double>(branches)) {
    throw ConfigError("step budget must give every branch at least one step");
  }
}

std::vector<ProverConfig> make_configs(std::size_t n, std::uint64_t base_seed) {
  if (n == 0) throw ConfigError("ensemble size must be at least 1");
  static constexpr LiteralSelection kSelections[] = {LiteralSelection::All, LiteralSelection::NegativeOnly,
                                                     LiteralSelection::MaxWeight};
  static constexpr TieBreak kTieBreaks[] = {TieBreak::Age, TieBreak::Weight};
  constexpr std::size_t kDistinct = std::size(kSelections) * std::size(kTieBreaks);

  std::vector<ProverConfig> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = i % kDistinct;
    ProverConfig cfg;
    cfg.literal_selection = kSelections[slot % std::size(kSelections)];
    cfg.tie_break = kTieBreaks[slot / std::size(kSelections)];
    cfg.seed = base_seed + i / kDistinct;
    out.push_back(cfg);
  }
  return out;
}

std::vector<double> branch_budgets(std::size_t branches, double total, BudgetMode mode) {
  if (branches == 0) throw ConfigError("ensemble needs at least one branch");
  if (mode == BudgetMode::Seconds) return std::vector<double>(branches, total / static_cast<double>(branches));
  const auto steps = static_cast<std::uint64_t>(std::floor(total));
  const std::uint64_t share = steps / branches;
  const std::uint64_t remainder = steps % branches;
  std::vector<double> out;
  for (std::size_t b = 0; b < branches; ++b) out.push_back(static_cast<double>(share + (b < remainder ? 1 : 0)));
  return out;
}

ProverConfig with_budget(ProverConfig config, double budget, BudgetMode mode) {
  if (mode == BudgetMode::Seconds) {
    config.time_limit = budget;
    config.step_limit = std::numeric_limits<std::size_t>::max();
  } else {
    config.step_limit = static_cast<std::size_t>(budget);
    config.time_limit = std::numeric_limits<double>::infinity();
  }
  return config;
}

std::set<std::string> EnsembleResult::solved_by(std::size_t branch) const {
  std::set<std::string> out;
  for (const auto& o : branches.at(branch)) {
    if (o.status == ProofStatus::Unsatisfiable) out.insert(o.problem);
  }
  return out;
}

std::set<std::string> union_solved(const std::vector<std::vector<BranchOutcome>>& branches) {
  std::set<std::string> out;
  for (const auto& branch : branches) {
    for (const auto& o : branch) {
      if (o.status == ProofStatus::Unsatisfiable) out.insert(o.problem);
    }
  }
  return out;
}

EnsembleResult run_ensemble(std::span<const Problem> problems, const EnsembleSpec& spec,
                            std::span<const ModelParams* const> models, bool parallel) {
  spec.validate();
  if (!models.empty() && models.size() != spec.branches) {
    throw ConfigError("expected one checkpoint per branch");
  }

  EnsembleResult result;
  result.budgets = branch_budgets(spec.branches, spec.total_budget, spec.mode);
  result.branches.resize(spec.branches);

  auto run_branch = [&](std::size_t b) {
    const ModelParams* model = models.empty() ? nullptr : models[b];
    ProverConfig cfg = with_budget(spec.configs[b], result.budgets[b], spec.mode);
    cfg.guidance = model ? GuidanceKind::Policy : GuidanceKind::Heuristic;
    auto& outcomes = result.branches[b];
    outcomes.reserve(problems.size());
    for (const auto& problem : problems) {
      const ProofResult r = saturate(problem, cfg, model);
      outcomes.push_back(BranchOutcome{problem.name, b, r.status, r.stats.steps, r.stats.wall_ms});
    }
  };

  if (parallel && spec.branches > 1) {
    std::vector<std::jthread> workers;
    std::vector<std::exception_ptr> errors(spec.branches);
    for (std::size_t b = 0; b < spec.branches; ++b) {
      workers.emplace_back([&, b] {
        try {
          run_branch(b);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      });
    }
    workers.clear();  // join
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t b = 0; b < spec.branches; ++b) run_branch(b);
  }

  result.solved_union = union_solved(result.branches);
  return result;
}

void write_report(std::ostream& out, const EnsembleResult& result, std::size_t problem_count, BudgetMode mode) {
  out << "problem,branch,status,steps,time_ms\n";
  for (const auto& branch : result.branches) {
    for (const auto& o : branch) {
      out << o.problem << ',' << o.branch << ',' << to_string(o.status) << ',' << o.steps << ','
          << std::fixed << std::setprecision(3) << o.time_ms << std::defaultfloat << '\n';
    }
  }
  for (std::size_t b = 0; b < result.branches.size(); ++b) {
    out << "# branch " << b << ": budget=" << result.budgets[b] << ' ' << to_string(mode)
        << " solved=" << result.solved_by(b).size() << '\n';
  }
  const double pct = problem_count ? 100.0 * static_cast<double>(result.solved_union.size()) /
                                         static_cast<double>(problem_count)
                                   : 0.0;
  out << "# union: solved=" << result.solved_union.size() << '/' << problem_count << " (" << std::fixed
      << std::setprecision(1) << pct << "%)" << std::defaultfloat << '\n';
}

}  // namespace saturn
