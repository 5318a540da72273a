#include "saturn/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "saturn/error.hpp"
#include "saturn/policy.hpp"
#include "saturn/rng.hpp"

namespace saturn {

void HyperParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(temperature, "temperature");
  positive(temp_decay, "temperature decay");
  positive(reward_min, "min reward");
  positive(reward_max, "max reward");
  if (reward_min > reward_max) throw ConfigError("min reward exceeds max reward");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(regularization >= 0.0)) throw ConfigError("regularization must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (episode_max_literals == 0 || episode_max_weight == 0) throw ConfigError("episode clause caps must be positive");
  if (episode_step_limit == 0) throw ConfigError("episode step limit must be positive");
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
}

double compute_reward(std::size_t baseline_steps, std::size_t agent_steps, const HyperParams& hp) {
  if (baseline_steps == 0 || agent_steps == 0) throw ConfigError("step counts must be at least 1");
  const double ratio = static_cast<double>(baseline_steps) / static_cast<double>(agent_steps);
  return std::clamp(ratio, hp.reward_min, hp.reward_max);
}

std::vector<double> normalize_rewards(std::span<const double> rewards) {
  std::vector<double> out(rewards.begin(), rewards.end());
  if (out.empty()) return out;
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (double r : out) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  for (auto& r : out) r = (r - mean) / (sd + 1e-8);
  return out;
}

double temperature_at(const HyperParams& hp, std::size_t iteration) {
  return hp.temperature * std::pow(hp.temp_decay, static_cast<double>(iteration));
}

// ---------------------------------------------------------------------------
// Episodes

std::size_t BaselineCache::steps(const Problem& problem, const HyperParams& hp) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = steps_.find(problem.name); it != steps_.end()) return it->second;
  }
  ProverConfig cfg;
  cfg.guidance = GuidanceKind::Heuristic;
  cfg.age_weight_ratio = hp.baseline_ratio;
  cfg.step_limit = hp.episode_step_limit;
  cfg.max_literals = hp.episode_max_literals;
  cfg.max_weight = hp.episode_max_weight;
  const ProofResult r = saturate(problem, cfg);
  const std::size_t effort =
      r.status == ProofStatus::Unsatisfiable ? std::max<std::size_t>(r.stats.steps, 1) : hp.episode_step_limit + 1;
  std::lock_guard lock(mutex_);
  steps_.emplace(problem.name, effort);
  return effort;
}

Trajectory episode(const Problem& problem, const ModelParams& params, double temperature, std::uint64_t seed,
                   const HyperParams& hp, BaselineCache& baselines, const ProverConfig& base, bool with_dropout) {
  Trajectory traj;
  traj.problem = problem.name;
  traj.temperature = temperature;
  traj.dropout = DropoutSpec{with_dropout ? hp.dropout : 0.0, mix_seed(seed, 0xd7)};
  for (const auto& c : problem.clauses) {
    Clause canonical = c;
    canonicalize(canonical);
    traj.theory.push_back(std::move(canonical));
  }

  ProverConfig cfg = base;
  cfg.guidance = GuidanceKind::Policy;
  cfg.select_mode = SelectMode::Sample;
  cfg.temperature = temperature;
  cfg.step_limit = hp.episode_step_limit;
  cfg.max_literals = hp.episode_max_literals;
  cfg.max_weight = hp.episode_max_weight;
  cfg.time_limit = std::numeric_limits<double>::infinity();
  cfg.seed = seed;

  std::unordered_map<const Clause*, std::uint32_t> index;
  auto intern = [&](const Clause* c) {
    auto [it, inserted] = index.try_emplace(c, static_cast<std::uint32_t>(traj.clauses.size()));
    if (inserted) traj.clauses.push_back(*c);
    return it->second;
  };

  SaturateHooks hooks;
  hooks.dropout = traj.dropout;
  hooks.on_decision = [&](const DecisionView& view) {
    TrajectoryStep step;
    step.chosen = view.chosen;
    step.log_prob = view.log_prob;
    step.candidates.reserve(view.candidates.size());
    for (const Clause* c : view.candidates) step.candidates.push_back(intern(c));
    for (const Clause* c : view.state) step.state.push_back(intern(c));
    traj.steps.push_back(std::move(step));
  };

  const ProofResult result = saturate(problem, cfg, &params, hooks);
  traj.status = result.status;
  traj.steps_used = result.stats.steps;
  traj.baseline_steps = baselines.steps(problem, hp);
  traj.reward = traj.solved()
                    ? compute_reward(traj.baseline_steps, std::max<std::size_t>(traj.steps_used, 1), hp)
                    : 0.0;
  return traj;
}

// ---------------------------------------------------------------------------
// Loss

namespace {

struct EpisodeForward {
  TheoryGraph theory_graph;
  ForwardCache theory_cache;
  SymbolEmbeddings symbols;
  std::vector<ClauseGraph> graphs;
  std::vector<ForwardCache> caches;
  std::vector<Vector> embeddings;
};

EpisodeForward run_forward(const Trajectory& traj, const ModelParams& params, bool with_dropout, bool keep_cache) {
  EpisodeForward f;
  const DropoutSpec base = with_dropout ? traj.dropout : DropoutSpec{};
  f.theory_graph = build_theory_graph(traj.theory);
  if (!f.theory_graph.name_index.empty()) {
    const Tensor init = initial_embeddings(f.theory_graph, params, nullptr);
    const Tensor h = forward(f.theory_graph, params, init, keep_cache ? &f.theory_cache : nullptr,
                             theory_dropout(base));
    for (const auto& [symbol, node] : f.theory_graph.name_index) {
      const auto row = h.row(node);
      f.symbols.emplace(symbol, Vector(row.begin(), row.end()));
    }
  }
  f.graphs.reserve(traj.clauses.size());
  f.caches.resize(keep_cache ? traj.clauses.size() : 0);
  for (std::size_t k = 0; k < traj.clauses.size(); ++k) {
    const Clause& c = traj.clauses[k];
    f.graphs.push_back(build_clause_graph(c));
    const Tensor init = initial_embeddings(f.graphs.back(), params, &f.symbols);
    const Tensor h = forward(f.graphs.back(), params, init, keep_cache ? &f.caches[k] : nullptr,
                             clause_dropout(base, variant_key(c)));
    f.embeddings.push_back(readout(f.graphs.back(), h));
  }
  return f;
}

std::vector<Vector> gather(const std::vector<Vector>& embeddings, const std::vector<std::uint32_t>& idx) {
  std::vector<Vector> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(embeddings[i]);
  return out;
}

double episode_log_prob(const Trajectory& traj, const EpisodeForward& f, const ModelParams& params) {
  double total = 0.0;
  for (const auto& step : traj.steps) {
    const Vector state = state_summary({}, gather(f.embeddings, step.state), params.dim);
    const auto scores = score(state, gather(f.embeddings, step.candidates), params.policy);
    total += log_softmax_t(scores, traj.temperature, step.chosen);
  }
  return total;
}

std::vector<double> batch_coefficients(std::span<const Trajectory> batch) {
  std::vector<double> rewards;
  rewards.reserve(batch.size());
  for (const auto& t : batch) rewards.push_back(t.reward);
  auto normalized = normalize_rewards(rewards);
  for (auto& r : normalized) r = -r;
  return normalized;
}

}  // namespace

double loss_value(std::span<const Trajectory> batch, const ModelParams& params, const HyperParams& hp,
                  bool with_dropout) {
  const auto coeff = batch_coefficients(batch);
  double loss = 0.0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    if (coeff[e] == 0.0 || batch[e].steps.empty()) continue;
    const EpisodeForward f = run_forward(batch[e], params, with_dropout, false);
    loss += coeff[e] * episode_log_prob(batch[e], f, params);
  }
  return loss + hp.regularization * params.squared_norm();
}

LossAndGrads loss_and_grads(std::span<const Trajectory> batch, const ModelParams& params, const HyperParams& hp,
                            bool with_dropout) {
  if (batch.empty()) throw ConfigError("empty trajectory batch");
  LossAndGrads out;
  out.grads = params.zeros_like();
  const auto coeff = batch_coefficients(batch);
  const std::size_t d = params.dim;

  for (std::size_t e = 0; e < batch.size(); ++e) {
    const Trajectory& traj = batch[e];
    if (coeff[e] == 0.0 || traj.steps.empty()) continue;
    const EpisodeForward f = run_forward(traj, params, with_dropout, true);

    std::vector<Vector> emb_grad(traj.clauses.size());
    auto grad_of = [&](std::uint32_t k) -> Vector& {
      if (emb_grad[k].empty()) emb_grad[k].assign(d, 0.0);
      return emb_grad[k];
    };

    for (const auto& step : traj.steps) {
      const Vector state = state_summary({}, gather(f.embeddings, step.state), d);
      const auto candidates = gather(f.embeddings, step.candidates);
      const auto scores = score(state, candidates, params.policy);
      const auto probs = softmax_t(scores, traj.temperature);
      out.policy_loss += coeff[e] * log_softmax_t(scores, traj.temperature, step.chosen);

      Vector query(d, 0.0);
      gemv_acc(params.policy, state, query);
      Vector g_query(d, 0.0);
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double g_score = coeff[e] * ((i == step.chosen ? 1.0 : 0.0) - probs[i]) / traj.temperature;
        axpy(g_score, candidates[i], g_query);
        axpy(g_score, query, grad_of(step.candidates[i]));
      }
      outer_acc(g_query, state, out.grads.policy);
      if (!step.state.empty()) {
        Vector g_state(d, 0.0);
        gemv_t_acc(params.policy, g_query, g_state);
        const double inv = 1.0 / static_cast<double>(step.state.size());
        for (auto k : step.state) axpy(inv, g_state, grad_of(k));
      }
    }

    SymbolEmbeddings sym_grads;
    for (std::size_t k = 0; k < traj.clauses.size(); ++k) {
      if (emb_grad[k].empty()) continue;
      const ClauseGraph& graph = f.graphs[k];
      Tensor upstream(graph.node_count(), d);
      readout_backward(graph, emb_grad[k], upstream);
      const Tensor init_grad = backward(params, f.caches[k], upstream, out.grads);
      accumulate_initial_grad(graph, init_grad, &f.symbols, out.grads, &sym_grads);
    }
    if (!sym_grads.empty()) {
      const TheoryGraph& tg = f.theory_graph;
      Tensor upstream(tg.node_count(), d);
      for (const auto& [symbol, g] : sym_grads) {
        auto row = upstream.row(tg.name_index.at(symbol));
        std::copy(g.begin(), g.end(), row.begin());
      }
      const Tensor init_grad = backward(params, f.theory_cache, upstream, out.grads);
      accumulate_initial_grad(tg, init_grad, nullptr, out.grads, nullptr);
    }
  }

  out.regularization_loss = hp.regularization * params.squared_norm();
  out.grads.add_scaled(2.0 * hp.regularization, params);
  out.loss = out.policy_loss + out.regularization_loss;
  if (!std::isfinite(out.loss) || !out.grads.finite()) throw Error("non-finite loss or gradient");
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

std::string format_log_line(const IterationLog& log) {
  std::ostringstream out;
  out << std::setprecision(10) << "iteration=" << log.iteration << " tau=" << log.temperature
      << " mean_reward=" << log.mean_reward << " solved=" << log.solved;
  out << " loss=" << (log.epoch_losses.empty() ? 0.0 : log.epoch_losses.back());
  return out.str();
}

TrainResult train_from(ModelParams initial, std::span<const Problem> dataset, const HyperParams& hp,
                       std::uint64_t seed, const IterationCallback& on_iteration, const ProverConfig& base) {
  hp.validate();
  TrainResult result;
  result.params = std::move(initial);
  BaselineCache baselines;

  auto collect = [&](std::size_t iteration, double tau) {
    std::vector<Trajectory> batch;
    batch.reserve(dataset.size());
    for (std::size_t j = 0; j < dataset.size(); ++j) {
      const std::uint64_t episode_seed = mix_seed(seed, mix_seed(iteration, j));
      batch.push_back(episode(dataset[j], result.params, tau, episode_seed, hp, baselines, base, true));
    }
    return batch;
  };
  auto solved_count = [](const std::vector<Trajectory>& batch) {
    return static_cast<std::size_t>(std::count_if(batch.begin(), batch.end(), [](const Trajectory& t) { return t.solved(); }));
  };

  for (std::size_t it = 0; it < hp.iterations; ++it) {
    IterationLog log;
    log.iteration = it;
    log.temperature = temperature_at(hp, it);
    const auto batch = collect(it, log.temperature);
    log.solved = solved_count(batch);
    double reward_sum = 0.0;
    for (const auto& t : batch) reward_sum += t.reward;
    log.mean_reward = batch.empty() ? 0.0 : reward_sum / static_cast<double>(batch.size());

    if (!batch.empty()) {
      for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        const LossAndGrads lg = loss_and_grads(batch, result.params, hp, true);
        log.epoch_losses.push_back(lg.loss);
        result.params.add_scaled(-hp.learning_rate, lg.grads);
      }
    }
    result.solved.push_back(log.solved);
    result.iterations.push_back(log);
    if (on_iteration) on_iteration(log, result.params);
  }

  const auto final_batch = collect(hp.iterations, temperature_at(hp, hp.iterations));
  result.solved.push_back(solved_count(final_batch));
  return result;
}

TrainResult train_loop(std::span<const Problem> dataset, const HyperParams& hp, std::uint64_t seed,
                       const IterationCallback& on_iteration, const ProverConfig& base) {
  hp.validate();
  return train_from(init_params(hp.dim, seed), dataset, hp, seed, on_iteration, base);
}

// ---------------------------------------------------------------------------
// Gradient checking

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

// Fixed signature: p/2, q/1 predicates; f/1, g/2 functions; a, b constants.
struct RandomClauses {
  explicit RandomClauses(std::uint64_t seed) : rng(seed) {}

  Term term(int depth) {
    const auto roll = rng.below(depth > 0 ? 5 : 3);
    if (roll == 0) return Term::variable(static_cast<VarIndex>(rng.below(3)));
    if (roll == 1) return Term::app(kA);
    if (roll == 2) return Term::app(kB);
    if (roll == 3) return Term::app(kF, {term(depth - 1)});
    return Term::app(kG, {term(depth - 1), term(depth - 1)});
  }

  Clause clause() {
    Clause c;
    const auto n = 1 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) {
      Literal l;
      l.negated = rng.below(2) == 1;
      if (rng.below(2) == 0) {
        l.predicate = kP;
        l.args = {term(1), term(1)};
      } else {
        l.predicate = kQ;
        l.args = {term(2)};
      }
      c.literals.push_back(std::move(l));
    }
    merge_duplicate_literals(c);
    canonicalize(c);
    return c;
  }

  static constexpr SymbolId kP = 0, kQ = 1, kF = 2, kG = 3, kA = 4, kB = 5;
  Rng rng;
};

// Central differences with the given step, except that an entry whose +-step flips
// any ReLU sign is retried with a step ten times smaller (down to 1e-9). A kink
// inside the interval makes the difference quotient meaningless there.
template <typename LossFn>
void compare_blocks(ModelParams& params, const ModelParams& analytic, double epsilon, const LossFn& loss,
                    GradCheckReport& report) {
  ActivationTrace trace;
  set_activation_trace(&trace);
  struct Uninstall {
    ~Uninstall() { set_activation_trace(nullptr); }
  } uninstall;
  auto traced = [&](std::vector<bool>& signs) {
    trace.positive.clear();
    const double value = loss();
    signs = trace.positive;
    return value;
  };
  std::vector<bool> base, up, down;
  traced(base);

  auto blocks = params.blocks();
  const auto grads = analytic.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    double& worst = report.per_block[blocks[b].name];
    auto& data = blocks[b].tensor->data;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      double step = epsilon, numeric = 0.0;
      for (;;) {
        data[i] = saved + step;
        const double plus = traced(up);
        data[i] = saved - step;
        const double minus = traced(down);
        numeric = (plus - minus) / (2.0 * step);
        if ((up == base && down == base) || step < 1e-9) break;
        step /= 10.0;
      }
      data[i] = saved;
      if (step != epsilon) ++report.narrowed;
      const double err = relative_error(grads[b].tensor->data[i], numeric);
      worst = std::max(worst, err);
      report.max_relative_error = std::max(report.max_relative_error, err);
      ++report.entries_checked;
    }
  }
}

}  // namespace

GradCheckReport check_network_gradients(const ModelParams& start, std::uint64_t seed, std::size_t max_nodes,
                                        bool single_node, double epsilon) {
  ModelParams params = start;
  Graph graph;
  if (single_node) {
    // the node kind whose pre-activations sit furthest from the ReLU kink, so central
    // differences are exact up to rounding
    double best = -1.0;
    for (std::size_t k = 0; k < kNodeKindCount; ++k) {
      Graph candidate;
      candidate.nodes.push_back(GraphNode{0, static_cast<NodeKind>(k), std::nullopt});
      ForwardCache probe;
      forward(candidate, params, initial_embeddings(candidate, params, nullptr), &probe);
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& pre : probe.pre) {
        for (double z : pre.data) margin = std::min(margin, std::abs(z));
      }
      if (margin > best) {
        best = margin;
        graph = std::move(candidate);
      }
    }
  } else {
    RandomClauses gen(mix_seed(seed, 0x9c));
    for (int attempt = 0; attempt < 1000; ++attempt) {
      ClauseGraph g = build_clause_graph(gen.clause());
      if (g.node_count() <= max_nodes && g.node_count() >= std::min<std::size_t>(max_nodes, 6)) {
        graph = std::move(g);
        break;
      }
    }
    if (graph.nodes.empty()) graph = build_clause_graph(gen.clause());
  }

  Rng rng(mix_seed(seed, 0x11));
  Tensor upstream(graph.node_count(), params.dim);
  for (auto& x : upstream.data) x = rng.uniform(-1.0, 1.0);
  const Tensor init = initial_embeddings(graph, params, nullptr);

  auto loss = [&] {
    const Tensor fresh_init = initial_embeddings(graph, params, nullptr);
    const Tensor h = forward(graph, params, fresh_init);
    return dot(h.data, upstream.data);
  };

  ForwardCache cache;
  forward(graph, params, init, &cache);
  ModelParams grads = params.zeros_like();
  const Tensor init_grad = backward(params, cache, upstream, grads);
  accumulate_initial_grad(graph, init_grad, nullptr, grads, nullptr);

  GradCheckReport report;
  compare_blocks(params, grads, epsilon, loss, report);
  return report;
}

GradCheckReport check_network_gradients(std::uint64_t seed, std::size_t dim, std::size_t max_nodes, bool single_node,
                                        double epsilon) {
  return check_network_gradients(init_params(dim, seed), seed, max_nodes, single_node, epsilon);
}

GradCheckReport check_loss_gradients(const ModelParams& start, std::uint64_t seed, double epsilon) {
  ModelParams params = start;
  RandomClauses gen(mix_seed(seed, 0x10c));
  HyperParams hp;
  hp.dim = params.dim;

  std::vector<Trajectory> batch(3);
  for (std::size_t e = 0; e < batch.size(); ++e) {
    Trajectory& t = batch[e];
    t.problem = "synthetic" + std::to_string(e);
    for (int i = 0; i < 3; ++i) t.theory.push_back(gen.clause());
    for (int i = 0; i < 6; ++i) t.clauses.push_back(gen.clause());
    t.temperature = 0.5 + 2.5 * gen.rng.uniform01();
    t.status = ProofStatus::Unsatisfiable;
    t.reward = 1.0 + gen.rng.uniform01();
    const auto steps = 2 + gen.rng.below(2);
    for (std::size_t s = 0; s < steps; ++s) {
      TrajectoryStep step;
      std::vector<std::uint32_t> pool(t.clauses.size());
      std::iota(pool.begin(), pool.end(), 0u);
      for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[gen.rng.below(i)]);
      const auto n_candidates = 2 + gen.rng.below(3);
      step.candidates.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_candidates));
      const auto n_state = 1 + gen.rng.below(2);
      step.state.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_candidates),
                        pool.begin() + static_cast<std::ptrdiff_t>(n_candidates + n_state));
      step.chosen = gen.rng.below(n_candidates);
      t.steps.push_back(std::move(step));
    }
  }

  const LossAndGrads lg = loss_and_grads(batch, params, hp, false);
  GradCheckReport report;
  compare_blocks(params, lg.grads, epsilon, [&] { return loss_value(batch, params, hp, false); }, report);
  return report;
}

GradCheckReport check_loss_gradients(std::uint64_t seed, std::size_t dim, double epsilon) {
  return check_loss_gradients(init_params(dim, seed), seed, epsilon);
}

}  // namespace saturn
