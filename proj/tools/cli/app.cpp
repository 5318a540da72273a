#include "app.hpp"

#include <CLI11.hpp>
#include <map>
#include <ostream>

#include "commands.hpp"
#include "saturn/error.hpp"

namespace saturn::cli {

namespace {

// Flags that mirror config-file keys. Values stay strings until the settings layer
// parses them so file and flag share one code path.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> flags;  // (flag, key)
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    flags.emplace_back(flag, key);
    app->add_option(flag, values[key], help);
  }

  KeyValues given(const CLI::App* app) const {
    KeyValues out;
    for (const auto& [flag, key] : flags) {
      if (app->count(flag) > 0) out.emplace_back(key, values.at(key));
    }
    return out;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"saturn: saturation prover with learned clause selection"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ParseOptions parse_opts;
  auto* parse = app.add_subcommand("parse", "Parse a TPTP CNF file and summarize it");
  parse->add_option("file", parse_opts.file, "problem file")->required();

  ProveOptions prove_opts;
  Overrides prove_flags;
  auto* prove = app.add_subcommand("prove", "Run the prover on one problem");
  prove->add_option("file", prove_opts.file, "problem file")->required();
  prove->add_option("--config", prove_opts.config_file, "key=value settings file");
  prove_flags.add(prove, "--checkpoint", "checkpoint", "model checkpoint (enables policy guidance)");
  prove_flags.add(prove, "--time", "time", "time limit in seconds");
  prove_flags.add(prove, "--steps", "steps", "given-clause step limit");
  prove_flags.add(prove, "--seed", "seed", "random seed");
  prove_flags.add(prove, "--selection", "selection", "literal selection: all, negative_only, max_weight");
  prove_flags.add(prove, "--tie-break", "tie_break", "candidate order: age, weight");
  prove_flags.add(prove, "--guidance", "guidance", "heuristic or policy");
  prove_flags.add(prove, "--ratio", "ratio", "weight picks per age pick (heuristic guidance)");
  prove_flags.add(prove, "--temperature", "temperature", "softmax temperature (policy guidance)");

  EnsembleOptions ens_opts;
  auto* ensemble = app.add_subcommand("ensemble", "Run a time-sliced ensemble over a directory of problems");
  ensemble->add_option("dir", ens_opts.dir, "directory of .p files")->required();
  ensemble->add_option("--n", ens_opts.branches, "number of branches")->check(CLI::PositiveNumber);
  ensemble->add_option("--time", ens_opts.total, "total budget (seconds, or steps with --steps-mode)")
      ->check(CLI::PositiveNumber);
  ensemble->add_flag("--steps-mode", ens_opts.steps_mode, "interpret the budget as given-clause steps");
  ensemble->add_option("--checkpoints", ens_opts.checkpoints,
                       "one checkpoint per branch, or a directory holding branch<i>.ckpt")
      ->delimiter(',');
  ensemble->add_option("--seed", ens_opts.seed, "base seed for branch configs");
  ensemble->add_flag("--sequential", ens_opts.sequential, "run branches one after another");
  ensemble->add_option("--report", ens_opts.report, "write the CSV report here instead of stdout");

  TrainOptions train_opts;
  Overrides train_flags;
  auto* train = app.add_subcommand("train", "Train a clause-selection model");
  train->add_option("dir", train_opts.dir, "directory of .p training problems")->required();
  train->add_option("--config", train_opts.config_file, "key=value settings file");
  train->add_option("--seed", train_opts.seed, "random seed");
  train->add_option("--out", train_opts.out_dir, "checkpoint directory (default $SATURN_CHECKPOINT_DIR)");
  train->add_option("--branch", train_opts.branch, "ensemble branch whose prover settings to train with");
  train->add_option("--n", train_opts.branches, "ensemble size the branch index refers to")
      ->check(CLI::PositiveNumber);
  train_flags.add(train, "--tau", "tau", "initial temperature [3]");
  train_flags.add(train, "--dropout", "dropout", "dropout rate [0.57]");
  train_flags.add(train, "--lr", "lr", "learning rate [0.001]");
  train_flags.add(train, "--decay", "decay", "temperature decay per iteration [0.89]");
  train_flags.add(train, "--lambda", "lambda", "L2 regularization [0.004]");
  train_flags.add(train, "--epochs", "epochs", "gradient steps per iteration [10]");
  train_flags.add(train, "--reward-min", "reward_min", "reward floor [1.0]");
  train_flags.add(train, "--reward-max", "reward_max", "reward ceiling [2.0]");
  train_flags.add(train, "--iterations", "iterations", "training iterations [5]");
  train_flags.add(train, "--steps", "steps", "step limit per episode [50]");
  train_flags.add(train, "--dim", "dim", "embedding dimension [64]");

  CheckGradOptions grad_opts;
  auto* grad = app.add_subcommand("check-grad", "Compare analytic gradients with finite differences");
  grad->add_option("--seed", grad_opts.seed, "random seed");
  grad->add_option("--dim", grad_opts.dim, "embedding dimension")->check(CLI::PositiveNumber);
  grad->add_option("--max-nodes", grad_opts.max_nodes, "largest random graph")->check(CLI::PositiveNumber);
  grad->add_option("--checkpoint", grad_opts.checkpoint, "check at these parameters");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitError;
  }

  try {
    if (*parse) return cmd_parse(parse_opts, out, err);
    if (*prove) {
      prove_opts.overrides = prove_flags.given(prove);
      return cmd_prove(prove_opts, out, err);
    }
    if (*ensemble) return cmd_ensemble(ens_opts, out, err);
    if (*train) {
      train_opts.overrides = train_flags.given(train);
      return cmd_train(train_opts, out, err);
    }
    if (*grad) return cmd_check_grad(grad_opts, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace saturn::cli
