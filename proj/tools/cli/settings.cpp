#include "settings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "saturn/error.hpp"

namespace saturn::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("bad number for " + key + ": '" + value + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("bad count for " + key + ": '" + value + "'");
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  KeyValues out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    for (auto& ch : key) {
      if (ch == '-') ch = '_';
    }
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

bool apply_prover_key(ProverConfig& config, std::optional<std::string>& checkpoint, const std::string& key,
                      const std::string& value) {
  if (key == "selection" || key == "literal_selection") {
    auto parsed = parse_literal_selection(value);
    if (!parsed) throw ConfigError("unknown literal selection '" + value + "'");
    config.literal_selection = *parsed;
  } else if (key == "tie_break") {
    auto parsed = parse_tie_break(value);
    if (!parsed) throw ConfigError("unknown tie break '" + value + "'");
    config.tie_break = *parsed;
  } else if (key == "guidance") {
    auto parsed = parse_guidance(value);
    if (!parsed) throw ConfigError("unknown guidance '" + value + "'");
    config.guidance = *parsed;
  } else if (key == "ratio" || key == "age_weight_ratio") {
    config.age_weight_ratio = to_size(key, value);
  } else if (key == "steps" || key == "step_limit") {
    config.step_limit = to_size(key, value);
  } else if (key == "time" || key == "time_limit") {
    config.time_limit = to_double(key, value);
  } else if (key == "seed") {
    config.seed = to_size(key, value);
  } else if (key == "select_mode") {
    if (value == "greedy") {
      config.select_mode = SelectMode::Greedy;
    } else if (value == "sample") {
      config.select_mode = SelectMode::Sample;
    } else {
      throw ConfigError("unknown select mode '" + value + "'");
    }
  } else if (key == "temperature" || key == "tau") {
    config.temperature = to_double(key, value);
  } else if (key == "max_literals") {
    config.max_literals = to_size(key, value);
  } else if (key == "max_weight") {
    config.max_weight = to_size(key, value);
  } else if (key == "checkpoint") {
    checkpoint = value;
  } else {
    return false;
  }
  return true;
}

bool apply_train_key(HyperParams& hp, const std::string& key, const std::string& value) {
  if (key == "tau" || key == "temperature") {
    hp.temperature = to_double(key, value);
  } else if (key == "dropout") {
    hp.dropout = to_double(key, value);
  } else if (key == "lr" || key == "learning_rate") {
    hp.learning_rate = to_double(key, value);
  } else if (key == "decay" || key == "temp_decay") {
    hp.temp_decay = to_double(key, value);
  } else if (key == "lambda" || key == "regularization") {
    hp.regularization = to_double(key, value);
  } else if (key == "epochs") {
    hp.epochs = to_size(key, value);
  } else if (key == "reward_min") {
    hp.reward_min = to_double(key, value);
  } else if (key == "reward_max") {
    hp.reward_max = to_double(key, value);
  } else if (key == "iterations") {
    hp.iterations = to_size(key, value);
  } else if (key == "steps" || key == "episode_step_limit") {
    hp.episode_step_limit = to_size(key, value);
  } else if (key == "max_literals" || key == "episode_max_literals") {
    hp.episode_max_literals = to_size(key, value);
  } else if (key == "max_weight" || key == "episode_max_weight") {
    hp.episode_max_weight = to_size(key, value);
  } else if (key == "dim") {
    hp.dim = to_size(key, value);
  } else if (key == "ratio" || key == "baseline_ratio") {
    hp.baseline_ratio = to_size(key, value);
  } else {
    return false;
  }
  return true;
}

std::string describe(const ProverConfig& c) {
  std::ostringstream out;
  out << "selection=" << to_string(c.literal_selection) << " tie_break=" << to_string(c.tie_break)
      << " guidance=" << to_string(c.guidance) << " ratio=" << c.age_weight_ratio << " steps=" << c.step_limit;
  if (std::isfinite(c.time_limit)) out << " time=" << format_number(c.time_limit);
  out << " seed=" << c.seed << " select_mode=" << (c.select_mode == SelectMode::Greedy ? "greedy" : "sample")
      << " temperature=" << format_number(c.temperature) << " max_literals=" << c.max_literals
      << " max_weight=" << c.max_weight;
  return out.str();
}

std::string describe(const HyperParams& hp) {
  std::ostringstream out;
  out << "tau=" << format_number(hp.temperature) << " lr=" << format_number(hp.learning_rate)
      << " decay=" << format_number(hp.temp_decay) << " lambda=" << format_number(hp.regularization)
      << " epochs=" << hp.epochs << " dropout=" << format_number(hp.dropout)
      << " reward_min=" << format_number(hp.reward_min) << " reward_max=" << format_number(hp.reward_max)
      << " iterations=" << hp.iterations << " steps=" << hp.episode_step_limit << " dim=" << hp.dim
      << " ratio=" << hp.baseline_ratio << " max_literals=" << hp.episode_max_literals
      << " max_weight=" << hp.episode_max_weight;
  return out.str();
}

}  // namespace saturn::cli
