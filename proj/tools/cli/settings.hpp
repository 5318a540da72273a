#pragma once

// key=value configuration files. Keys use the long flag names without dashes, so a
// file line `steps=200` means the same as `--steps 200`. Flags given on the command
// line win over the file.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saturn/prover.hpp"
#include "saturn/train.hpp"

namespace saturn::cli {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Blank lines and lines starting with '#' are skipped. Throws ConfigError with the
/// file name and line on malformed input.
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies one prover key. Returns false for keys this layer does not know.
bool apply_prover_key(ProverConfig& config, std::optional<std::string>& checkpoint, const std::string& key,
                      const std::string& value);
/// Applies one training key. Returns false for unknown keys.
bool apply_train_key(HyperParams& hp, const std::string& key, const std::string& value);

/// Single-line key=value rendering, used in run manifests.
std::string describe(const ProverConfig& config);
std::string describe(const HyperParams& hp);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double value);

}  // namespace saturn::cli
