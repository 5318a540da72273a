#pragma once

// Policy-gradient training of the clause-selection model.
//
// An episode is one sampled proof attempt. Its reward is the baseline prover's effort
// divided by the agent's effort, clamped to [reward_min, reward_max], and 0 when the
// agent fails. Effort is measured in given-clause steps so runs are reproducible.
// Rewards are normalized over the batch and the loss is
//
//   L = -sum_e Rhat_e * sum_t log pi(a_t) + lambda * |theta|^2
//
// with gradients taken through the policy scores, the clause embeddings, the symbol
// embeddings and every message-passing layer.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "saturn/gnn.hpp"
#include "saturn/prover.hpp"

namespace saturn {

struct HyperParams {
  double temperature = 3.0;
  double dropout = 0.57;
  double learning_rate = 0.001;
  double temp_decay = 0.89;
  double regularization = 0.004;
  std::size_t epochs = 10;
  double reward_min = 1.0;
  double reward_max = 2.0;
  std::size_t iterations = 5;
  std::size_t episode_step_limit = 50;
  // Tighter clause size caps for episodes; an untrained policy on a recursive theory
  // otherwise floods U with long clauses.
  std::size_t episode_max_literals = 16;
  std::size_t episode_max_weight = 100;
  std::size_t dim = kDefaultDim;
  std::size_t baseline_ratio = 5;

  /// Throws ConfigError when a value is out of range.
  void validate() const;
};

/// clamp(baseline / agent, reward_min, reward_max). Throws ConfigError on zero counts.
double compute_reward(std::size_t baseline_steps, std::size_t agent_steps, const HyperParams& hp);

/// (r - mean) / (std + 1e-8) with the population standard deviation.
std::vector<double> normalize_rewards(std::span<const double> rewards);

/// Temperature at iteration k: temperature * temp_decay^k.
double temperature_at(const HyperParams& hp, std::size_t iteration);

struct TrajectoryStep {
  std::size_t chosen = 0;
  double log_prob = 0.0;
  std::vector<std::uint32_t> candidates;  // indices into Trajectory::clauses
  std::vector<std::uint32_t> state;       // indices into Trajectory::clauses
  std::size_t candidate_count() const noexcept { return candidates.size(); }
};

struct Trajectory {
  std::string problem;
  std::vector<Clause> theory;   // canonical input clauses (phase-1 graph)
  std::vector<Clause> clauses;  // every clause that was a candidate or in a state
  std::vector<TrajectoryStep> steps;
  ProofStatus status = ProofStatus::Incomplete;
  std::size_t steps_used = 0;
  std::size_t baseline_steps = 0;
  double reward = 0.0;
  double temperature = 1.0;
  DropoutSpec dropout;

  bool solved() const noexcept { return status == ProofStatus::Unsatisfiable; }
};

/// Baseline effort per problem: heuristic age/weight guidance under the episode step
/// limit. A failed baseline run counts as step_limit + 1. Safe for concurrent use.
class BaselineCache {
 public:
  std::size_t steps(const Problem& problem, const HyperParams& hp);

 private:
  std::mutex mutex_;
  std::map<std::string, std::size_t> steps_;
};

/// One sampled proof attempt at temperature `temperature`. `base` supplies literal
/// selection and tie break; guidance, mode, limits and seed are set here. Dropout is
/// active when `with_dropout` is set.
Trajectory episode(const Problem& problem, const ModelParams& params, double temperature, std::uint64_t seed,
                   const HyperParams& hp, BaselineCache& baselines, const ProverConfig& base = {},
                   bool with_dropout = true);

struct LossAndGrads {
  double loss = 0.0;
  double policy_loss = 0.0;
  double regularization_loss = 0.0;
  ModelParams grads;
};

/// Loss and exact gradients over a batch of trajectories.
LossAndGrads loss_and_grads(std::span<const Trajectory> batch, const ModelParams& params, const HyperParams& hp,
                            bool with_dropout = true);
/// The same loss without the backward pass.
double loss_value(std::span<const Trajectory> batch, const ModelParams& params, const HyperParams& hp,
                  bool with_dropout = true);

struct IterationLog {
  std::size_t iteration = 0;
  double temperature = 0.0;
  double mean_reward = 0.0;
  std::size_t solved = 0;
  std::vector<double> epoch_losses;
};

std::string format_log_line(const IterationLog& log);

struct TrainResult {
  ModelParams params;
  std::vector<IterationLog> iterations;
  /// Solved counts before each update round plus one final measurement after the last
  /// round, so iterations + 1 entries.
  std::vector<std::size_t> solved;
};

using IterationCallback = std::function<void(const IterationLog&, const ModelParams&)>;

/// Trains from init_params(hp.dim, seed). Per iteration: one episode per problem at the
/// current temperature, hp.epochs SGD steps on the collected batch, then temperature
/// decay. `base` configures the prover branch being trained.
TrainResult train_loop(std::span<const Problem> dataset, const HyperParams& hp, std::uint64_t seed,
                       const IterationCallback& on_iteration = {}, const ProverConfig& base = {});

/// Same, continuing from `initial` instead of a fresh initialization.
TrainResult train_from(ModelParams initial, std::span<const Problem> dataset, const HyperParams& hp,
                       std::uint64_t seed, const IterationCallback& on_iteration = {},
                       const ProverConfig& base = {});

// ---------------------------------------------------------------------------
// Gradient checking

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  std::size_t narrowed = 0;  // entries whose step was shrunk to stay off a ReLU kink
  std::map<std::string, double> per_block;  // block name -> max relative error
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central differences with step `epsilon` against backward() for the scalar
/// sum(upstream .* forward(graph)) on a random clause graph with at most `max_nodes`
/// nodes. A single isolated node is used when `single_node` is set.
GradCheckReport check_network_gradients(std::uint64_t seed, std::size_t dim, std::size_t max_nodes = 20,
                                        bool single_node = false, double epsilon = 1e-4);

/// Central differences against loss_and_grads() on a synthetic batch of trajectories
/// over random clauses, dropout off.
GradCheckReport check_loss_gradients(std::uint64_t seed, std::size_t dim, double epsilon = 1e-4);

/// Optional starting point for either check instead of init_params(dim, seed).
GradCheckReport check_network_gradients(const ModelParams& params, std::uint64_t seed, std::size_t max_nodes,
                                        bool single_node, double epsilon = 1e-4);
GradCheckReport check_loss_gradients(const ModelParams& params, std::uint64_t seed, double epsilon = 1e-4);

}  // namespace saturn
