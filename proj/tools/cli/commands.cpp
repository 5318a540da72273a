#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "app.hpp"
#include "saturn/checkpoint.hpp"
#include "saturn/ensemble.hpp"
#include "saturn/error.hpp"
#include "saturn/train.hpp"

namespace fs = std::filesystem;

namespace saturn::cli {

namespace {

// Parse errors are reported as file:line:col so editors can jump to them.
struct LoadFailure {};

Problem load_problem(const std::string& file, std::ostream& err) {
  try {
    return parse_problem_file(file);
  } catch (const ParseError& e) {
    err << file << ':' << e.line() << ':' << e.column() << ": error: " << e.detail() << '\n';
  } catch (const Error& e) {
    err << file << ": error: " << e.what() << '\n';
  }
  throw LoadFailure{};
}

std::vector<Problem> load_directory(const std::string& dir, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << dir << ": error: not a directory\n";
    throw LoadFailure{};
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".p") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Problem> problems;
  problems.reserve(files.size());
  for (const auto& f : files) problems.push_back(load_problem(f.string(), err));
  return problems;
}

std::string clause_label(const Clause& c) { return c.name.empty() ? "c" + std::to_string(c.id) : c.name; }

void print_derivation(std::ostream& out, const ProofResult& result, const Problem& problem,
                      const std::string& source) {
  std::map<ClauseId, std::string> labels;
  for (const auto& step : result.proof) labels[step.clause.id] = clause_label(step.clause);
  for (const auto& step : result.proof) {
    const Clause& c = step.clause;
    out << "cnf(" << labels[c.id] << ", " << to_string(c.role) << ", " << render_formula(c, problem.symbols)
        << ", ";
    if (step.rule == InferenceRule::Input) {
      out << "file('" << source << "', " << labels[c.id] << ')';
    } else {
      out << "inference(" << to_string(step.rule) << ", [status(thm)], [";
      for (std::size_t i = 0; i < c.parents.size(); ++i) {
        if (i) out << ", ";
        auto it = labels.find(c.parents[i]);
        out << (it == labels.end() ? "c" + std::to_string(c.parents[i]) : it->second);
      }
      out << "])";
    }
    out << ").\n";
  }
}

void print_stats(std::ostream& out, const ProverStats& s, bool timed) {
  out << "% steps=" << s.steps << " generated=" << s.generated << " kept=" << s.kept
      << " tautologies=" << s.tautologies << " duplicates=" << s.duplicates << " oversized=" << s.oversized
      << " phase1_passes=" << s.phase1_passes << " clause_embeddings=" << s.clause_embeddings << '\n';
  if (timed) out << "% wall_ms=" << std::fixed << std::setprecision(3) << s.wall_ms << std::defaultfloat << '\n';
}

int exit_code(ProofStatus status) {
  return status == ProofStatus::Unsatisfiable || status == ProofStatus::Saturated ? kExitOk : kExitUnresolved;
}

std::vector<std::unique_ptr<ModelParams>> load_branch_models(const std::vector<std::string>& paths,
                                                             std::size_t branches) {
  std::vector<fs::path> files;
  if (paths.size() == 1 && fs::is_directory(paths[0])) {
    for (std::size_t b = 0; b < branches; ++b) files.push_back(fs::path(paths[0]) / ("branch" + std::to_string(b) + ".ckpt"));
  } else {
    if (paths.size() != branches) {
      throw ConfigError("expected " + std::to_string(branches) + " checkpoints, got " + std::to_string(paths.size()));
    }
    files.assign(paths.begin(), paths.end());
  }
  std::vector<std::unique_ptr<ModelParams>> out;
  for (const auto& f : files) out.push_back(std::make_unique<ModelParams>(load_checkpoint(f)));
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string default_checkpoint_dir() {
  const char* env = std::getenv("SATURN_CHECKPOINT_DIR");
  return env && *env ? std::string(env) : std::string("checkpoints");
}

int cmd_parse(const ParseOptions& opts, std::ostream& out, std::ostream& err) {
  Problem problem;
  try {
    problem = load_problem(opts.file, err);
  } catch (const LoadFailure&) {
    return kExitError;
  }
  out << problem.clauses.size() << (problem.clauses.size() == 1 ? " clause" : " clauses");
  if (!problem.symbols.empty()) {
    out << ", symbols:";
    // predicates, then functions, then constants; first occurrence within each kind
    for (auto kind : {SymbolKind::Predicate, SymbolKind::Function, SymbolKind::Constant}) {
      for (const auto& s : problem.symbols) {
        if (s.kind == kind) out << ' ' << s.display_name << '/' << s.arity;
      }
    }
  }
  out << '\n';
  return kExitOk;
}

int cmd_prove(const ProveOptions& opts, std::ostream& out, std::ostream& err) {
  ProverConfig config;
  std::optional<std::string> checkpoint;
  bool guidance_set = false;
  auto apply = [&](const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
      if (!apply_prover_key(config, checkpoint, key, value)) throw ConfigError("unknown setting '" + key + "'");
      guidance_set = guidance_set || key == "guidance";
    }
  };
  if (opts.config_file) apply(read_key_values(*opts.config_file));
  apply(opts.overrides);

  if (checkpoint && !guidance_set) config.guidance = GuidanceKind::Policy;
  if (config.guidance == GuidanceKind::Policy && !checkpoint) {
    const fs::path fallback = fs::path(default_checkpoint_dir()) / "model.ckpt";
    if (!fs::exists(fallback)) throw ConfigError("policy guidance needs a checkpoint (--checkpoint)");
    checkpoint = fallback.string();
  }
  config.validate();

  Problem problem;
  try {
    problem = load_problem(opts.file, err);
  } catch (const LoadFailure&) {
    return kExitError;
  }
  std::optional<ModelParams> model;
  if (config.guidance == GuidanceKind::Policy) model = load_checkpoint(*checkpoint);

  const bool timed = std::isfinite(config.time_limit);
  out << "% command=prove input=" << opts.file << " seed=" << config.seed
      << " checkpoint=" << (model ? *checkpoint : std::string("none"))
      << " config=" << (opts.config_file ? *opts.config_file : std::string("none")) << '\n';
  out << "% settings: " << describe(config) << '\n';

  const ProofResult result = saturate(problem, config, model ? &*model : nullptr);
  out << "% SZS status " << szs_status(result.status) << " for " << problem.name << '\n';
  if (result.status == ProofStatus::Unsatisfiable) {
    out << "% SZS output start CNFRefutation for " << problem.name << '\n';
    print_derivation(out, result, problem, fs::path(opts.file).filename().string());
    out << "% SZS output end CNFRefutation for " << problem.name << '\n';
  }
  print_stats(out, result.stats, timed);
  return exit_code(result.status);
}

int cmd_ensemble(const EnsembleOptions& opts, std::ostream& out, std::ostream& err) {
  EnsembleSpec spec;
  spec.branches = opts.branches;
  spec.total_budget = opts.total;
  spec.mode = opts.steps_mode ? BudgetMode::Steps : BudgetMode::Seconds;
  spec.configs = make_configs(opts.branches, opts.seed);
  spec.validate();

  std::vector<Problem> problems;
  try {
    problems = load_directory(opts.dir, err);
  } catch (const LoadFailure&) {
    return kExitError;
  }
  const auto owned = opts.checkpoints.empty() ? std::vector<std::unique_ptr<ModelParams>>{}
                                              : load_branch_models(opts.checkpoints, opts.branches);
  std::vector<const ModelParams*> models;
  for (const auto& m : owned) models.push_back(m.get());

  const EnsembleResult result = run_ensemble(problems, spec, models, !opts.sequential);

  std::ofstream file;
  if (opts.report) {
    file.open(*opts.report);
    if (!file) throw ConfigError("cannot write report " + *opts.report);
  }
  std::ostream& report = opts.report ? static_cast<std::ostream&>(file) : out;
  report << "# command=ensemble input=" << opts.dir << " n=" << opts.branches
         << " total=" << format_number(opts.total) << ' ' << to_string(spec.mode) << " seed=" << opts.seed
         << " checkpoints=" << (opts.checkpoints.empty() ? std::string("none") : join(opts.checkpoints, ','))
         << '\n';
  for (std::size_t b = 0; b < spec.branches; ++b) {
    ProverConfig cfg = with_budget(spec.configs[b], result.budgets[b], spec.mode);
    cfg.guidance = models.empty() ? GuidanceKind::Heuristic : GuidanceKind::Policy;
    report << "# branch " << b << " settings: " << describe(cfg) << '\n';
  }
  write_report(report, result, problems.size(), spec.mode);
  if (opts.report) {
    out << "# union: solved=" << result.solved_union.size() << '/' << problems.size() << '\n';
  }
  return kExitOk;
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  HyperParams hp;
  auto apply = [&](const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
      if (!apply_train_key(hp, key, value)) throw ConfigError("unknown setting '" + key + "'");
    }
  };
  if (opts.config_file) apply(read_key_values(*opts.config_file));
  apply(opts.overrides);
  hp.validate();
  if (opts.branch >= opts.branches) throw ConfigError("--branch must be smaller than --n");
  const ProverConfig base = make_configs(opts.branches, opts.seed)[opts.branch];

  std::vector<Problem> problems;
  try {
    problems = load_directory(opts.dir, err);
  } catch (const LoadFailure&) {
    return kExitError;
  }

  const fs::path out_dir = opts.out_dir ? fs::path(*opts.out_dir) : fs::path(default_checkpoint_dir());
  fs::create_directories(out_dir);
  std::ofstream log(out_dir / "train.log");
  if (!log) throw ConfigError("cannot write " + (out_dir / "train.log").string());
  auto emit = [&](const std::string& line) {
    out << line << '\n';
    log << line << '\n';
  };

  emit("# command=train input=" + opts.dir + " seed=" + std::to_string(opts.seed) + " out=" + out_dir.string() +
       " branch=" + std::to_string(opts.branch) + "/" + std::to_string(opts.branches) +
       " config=" + (opts.config_file ? *opts.config_file : std::string("none")) +
       " problems=" + std::to_string(problems.size()));
  emit("# hyperparameters: " + describe(hp));
  emit("# prover: " + describe(base));

  ModelParams initial = init_params(hp.dim, opts.seed);
  save_checkpoint(initial, out_dir / "iter0.ckpt");
  emit("checkpoint=" + (out_dir / "iter0.ckpt").string());
  if (hp.iterations == 0) return kExitOk;

  auto on_iteration = [&](const IterationLog& entry, const ModelParams& params) {
    emit(format_log_line(entry));
    const fs::path path = out_dir / ("iter" + std::to_string(entry.iteration + 1) + ".ckpt");
    save_checkpoint(params, path);
    emit("checkpoint=" + path.string());
  };
  const TrainResult result = train_from(std::move(initial), problems, hp, opts.seed, on_iteration, base);
  save_checkpoint(result.params, out_dir / "model.ckpt");

  std::ostringstream solved;
  for (std::size_t i = 0; i < result.solved.size(); ++i) solved << (i ? "," : "") << result.solved[i];
  emit("solved_per_iteration=" + solved.str());
  emit("checkpoint=" + (out_dir / "model.ckpt").string());
  return kExitOk;
}

int cmd_check_grad(const CheckGradOptions& opts, std::ostream& out, std::ostream& /*err*/) {
  ModelParams params = opts.checkpoint ? load_checkpoint(*opts.checkpoint) : init_params(opts.dim, opts.seed);
  const bool single = params.dim == 1;

  out << "# command=check-grad seed=" << opts.seed << " dim=" << params.dim
      << " checkpoint=" << (opts.checkpoint ? *opts.checkpoint : std::string("none")) << '\n';

  std::vector<std::pair<std::string, GradCheckReport>> reports;
  reports.emplace_back("network", check_network_gradients(params, opts.seed, opts.max_nodes, single));
  if (!single) reports.emplace_back("loss", check_loss_gradients(params, opts.seed));

  double worst = 0.0;
  out << std::scientific << std::setprecision(3);
  for (const auto& [label, report] : reports) {
    for (const auto& [block, error] : report.per_block) {
      out << label << ' ' << block << " max_rel_error=" << error << '\n';
    }
    out << label << " entries=" << report.entries_checked << " narrowed=" << report.narrowed << '\n';
    worst = std::max(worst, report.max_relative_error);
  }
  out << "max_relative_error=" << worst << std::defaultfloat << '\n';
  return worst < 1e-4 ? kExitOk : kExitUnresolved;
}

}  // namespace saturn::cli
