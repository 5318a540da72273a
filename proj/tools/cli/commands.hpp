#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "settings.hpp"

namespace saturn::cli {

struct ParseOptions {
  std::string file;
};

struct ProveOptions {
  std::string file;
  std::optional<std::string> config_file;
  KeyValues overrides;  // flags given on the command line, applied after the file
};

struct EnsembleOptions {
  std::string dir;
  std::size_t branches = 4;
  double total = 100.0;
  bool steps_mode = false;
  std::vector<std::string> checkpoints;
  std::uint64_t seed = 0;
  bool sequential = false;
  std::optional<std::string> report;
};

struct TrainOptions {
  std::string dir;
  std::optional<std::string> config_file;
  KeyValues overrides;
  std::uint64_t seed = 0;
  std::optional<std::string> out_dir;
  std::size_t branch = 0;
  std::size_t branches = 1;
};

struct CheckGradOptions {
  std::uint64_t seed = 0;
  std::size_t dim = 8;
  std::size_t max_nodes = 20;
  std::optional<std::string> checkpoint;
};

int cmd_parse(const ParseOptions& opts, std::ostream& out, std::ostream& err);
int cmd_prove(const ProveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_ensemble(const EnsembleOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int cmd_check_grad(const CheckGradOptions& opts, std::ostream& out, std::ostream& err);

/// Directory named by SATURN_CHECKPOINT_DIR, or "checkpoints".
std::string default_checkpoint_dir();

}  // namespace saturn::cli
