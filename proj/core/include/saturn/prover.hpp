#pragma once

// Given-clause saturation (Otter loop) with learned or heuristic clause selection.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saturn/gnn.hpp"
#include "saturn/logic.hpp"
#include "saturn/policy.hpp"
#include "saturn/tptp.hpp"

namespace saturn {

enum class TieBreak { Age, Weight };
enum class GuidanceKind { Heuristic, Policy };

const char* to_string(TieBreak tie_break);
const char* to_string(GuidanceKind guidance);
std::optional<TieBreak> parse_tie_break(const std::string& text);
std::optional<GuidanceKind> parse_guidance(const std::string& text);

struct ProverConfig {
  LiteralSelection literal_selection = LiteralSelection::All;
  /// Order in which unprocessed clauses are presented: by age (clause id) or by
  /// (weight, id). Greedy policy selection breaks score ties by this order, and
  /// heuristic weight picks use literal count as a secondary key under Weight.
  TieBreak tie_break = TieBreak::Age;
  GuidanceKind guidance = GuidanceKind::Heuristic;
  /// Heuristic guidance: weight picks per age pick.
  std::size_t age_weight_ratio = 5;
  std::size_t step_limit = 10000;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  std::uint64_t seed = 0;
  SelectMode select_mode = SelectMode::Greedy;
  double temperature = 3.0;
  std::size_t max_literals = 64;
  std::size_t max_weight = 400;

  /// Throws ConfigError when a limit is non-positive or the temperature is invalid.
  void validate() const;

  friend bool operator==(const ProverConfig&, const ProverConfig&) = default;
};

enum class ProofStatus { Unsatisfiable, Saturated, Timeout, StepLimit, Incomplete };

const char* to_string(ProofStatus status);
/// SZS ontology name: Unsatisfiable, Satisfiable, Timeout or GaveUp.
const char* szs_status(ProofStatus status);

enum class InferenceRule { Input, Resolution, Factoring };
const char* to_string(InferenceRule rule);

struct ProofStep {
  Clause clause;  // carries id and parent ids
  InferenceRule rule = InferenceRule::Input;
};

struct ProverStats {
  std::size_t steps = 0;
  std::size_t generated = 0;
  std::size_t kept = 0;
  std::size_t tautologies = 0;
  std::size_t duplicates = 0;
  std::size_t oversized = 0;
  std::size_t phase1_passes = 0;
  std::size_t clause_embeddings = 0;
  double wall_ms = 0.0;
};

struct ProofResult {
  ProofStatus status = ProofStatus::Incomplete;
  /// Unsatisfiable: ancestors of the empty clause in derivation (id) order.
  std::vector<ProofStep> proof;
  /// Processed set at termination, in selection order.
  std::vector<Clause> processed;
  std::vector<ClauseId> given_sequence;
  ProverStats stats;
};

/// One policy decision, reported to SaturateHooks::on_decision.
struct DecisionView {
  std::span<const Clause* const> candidates;  // presentation order
  std::span<const Clause* const> state;       // clauses averaged into the state summary
  std::span<const double> probabilities;
  std::size_t chosen = 0;
  double log_prob = 0.0;
  double temperature = 1.0;
};

struct SaturateHooks {
  /// Training-time dropout; per-clause and theory masks are derived from its seed.
  DropoutSpec dropout;
  std::function<void(const DecisionView&)> on_decision;
};

/// Dropout masks used for a given clause / for the theory pass of one proof attempt.
DropoutSpec clause_dropout(const DropoutSpec& base, const std::string& variant_key);
DropoutSpec theory_dropout(const DropoutSpec& base);

/// Runs the given-clause loop. Policy guidance requires `model`. Throws ConfigError for
/// an invalid configuration.
ProofResult saturate(const Problem& problem, const ProverConfig& config, const ModelParams* model = nullptr,
                     const SaturateHooks& hooks = {});

struct ReplayReport {
  bool ok = false;
  std::size_t failed_step = 0;
  std::string message;

  explicit operator bool() const noexcept { return ok; }
};

/// Re-derives every proof step from its recorded parents and checks that the last step
/// is the empty clause.
ReplayReport replay_proof(const ProofResult& result, const Problem& problem);

/// Brute force: every factor and every ordered-pair resolvent (under `selection`) over
/// `processed` is a tautology or a variant of a processed clause.
bool verify_saturation(std::span<const Clause> processed, LiteralSelection selection);

}  // namespace saturn
