#include "saturn/prover.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "saturn/error.hpp"
#include "saturn/rng.hpp"

namespace saturn {

const char* to_string(TieBreak tie_break) { return tie_break == TieBreak::Age ? "age" : "weight"; }

const char* to_string(GuidanceKind guidance) {
  return guidance == GuidanceKind::Heuristic ? "heuristic" : "policy";
}

std::optional<TieBreak> parse_tie_break(const std::string& text) {
  if (text == "age") return TieBreak::Age;
  if (text == "weight") return TieBreak::Weight;
  return std::nullopt;
}

std::optional<GuidanceKind> parse_guidance(const std::string& text) {
  if (text == "heuristic") return GuidanceKind::Heuristic;
  if (text == "policy") return GuidanceKind::Policy;
  return std::nullopt;
}

const char* to_string(ProofStatus status) {
  switch (status) {
    case ProofStatus::Unsatisfiable: return "Unsatisfiable";
    case ProofStatus::Saturated: return "Saturated";
    case ProofStatus::Timeout: return "Timeout";
    case ProofStatus::StepLimit: return "StepLimit";
    case ProofStatus::Incomplete: return "Incomplete";
  }
  return "?";
}

const char* szs_status(ProofStatus status) {
  switch (status) {
    case ProofStatus::Unsatisfiable: return "Unsatisfiable";
    case ProofStatus::Saturated: return "Satisfiable";
    case ProofStatus::Timeout: return "Timeout";
    case ProofStatus::StepLimit:
    case ProofStatus::Incomplete: return "GaveUp";
  }
  return "GaveUp";
}

const char* to_string(InferenceRule rule) {
  switch (rule) {
    case InferenceRule::Input: return "input";
    case InferenceRule::Resolution: return "resolution";
    case InferenceRule::Factoring: return "factoring";
  }
  return "?";
}

void ProverConfig::validate() const {
  if (step_limit == 0) throw ConfigError("step limit must be positive");
  if (!(time_limit > 0.0)) throw ConfigError("time limit must be positive");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
  if (max_literals == 0 || max_weight == 0) throw ConfigError("clause size limits must be positive");
}

DropoutSpec clause_dropout(const DropoutSpec& base, const std::string& variant_key) {
  return DropoutSpec{base.rate, mix_seed(base.seed, fnv1a(variant_key))};
}

DropoutSpec theory_dropout(const DropoutSpec& base) { return DropoutSpec{base.rate, mix_seed(base.seed, 0x7e0)}; }

namespace {

using Clock = std::chrono::steady_clock;

class Saturation {
 public:
  Saturation(const Problem& problem, const ProverConfig& config, const ModelParams* model,
             const SaturateHooks& hooks)
      : problem_(problem), config_(config), model_(model), hooks_(hooks), rng_(mix_seed(config.seed, 0x5e1)) {}

  ProofResult run() {
    const auto start = Clock::now();
    add_inputs();
    if (!empty_clause_ && model_ && config_.guidance == GuidanceKind::Policy) {
      std::vector<Clause> inputs;
      for (const auto& c : problem_.clauses) {
        Clause canonical = c;
        canonicalize(canonical);
        inputs.push_back(std::move(canonical));
      }
      symbols_ = symbol_embeddings(build_theory_graph(inputs), *model_, theory_dropout(hooks_.dropout));
      ++result_.stats.phase1_passes;
      for (ClauseId id : unprocessed_) embed(id);
    }

    for (;;) {
      if (empty_clause_) {
        result_.status = ProofStatus::Unsatisfiable;
        break;
      }
      if (unprocessed_.empty()) {
        result_.status = result_.stats.oversized ? ProofStatus::Incomplete : ProofStatus::Saturated;
        break;
      }
      if (result_.stats.steps >= config_.step_limit) {
        result_.status = ProofStatus::StepLimit;
        break;
      }
      const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      if (elapsed >= config_.time_limit) {
        result_.status = ProofStatus::Timeout;
        break;
      }
      const std::size_t pick = config_.guidance == GuidanceKind::Policy ? pick_by_policy() : pick_by_heuristic();
      process(pick);
    }

    if (empty_clause_) extract_proof(*empty_clause_);
    for (ClauseId id : processed_) result_.processed.push_back(store_[id]);
    result_.stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return std::move(result_);
  }

 private:
  void add_inputs() {
    for (std::size_t i = 0; i < problem_.clauses.size(); ++i) {
      Clause c = problem_.clauses[i];
      canonicalize(c);
      c.id = static_cast<ClauseId>(i);
      c.parents.clear();
      store_.push_back(c);
      rules_.push_back(InferenceRule::Input);
      if (c.is_empty()) {
        empty_clause_ = c.id;
        return;
      }
      if (is_tautology(c)) {
        ++result_.stats.tautologies;
        continue;
      }
      if (!seen_.insert(variant_key(c)).second) {
        ++result_.stats.duplicates;
        continue;
      }
      insert_unprocessed(c.id);
    }
  }

  // Presentation order key for U.
  bool presented_before(ClauseId a, ClauseId b) const {
    if (config_.tie_break == TieBreak::Age) return a < b;
    const auto wa = store_[a].weight(), wb = store_[b].weight();
    return wa != wb ? wa < wb : a < b;
  }

  void insert_unprocessed(ClauseId id) {
    auto pos = std::upper_bound(unprocessed_.begin(), unprocessed_.end(), id,
                                [this](ClauseId a, ClauseId b) { return presented_before(a, b); });
    unprocessed_.insert(pos, id);
  }

  void embed(ClauseId id) {
    if (embeddings_.count(id)) return;
    const Clause& c = store_[id];
    embeddings_.emplace(id, clause_embedding(c, *model_, symbols_, clause_dropout(hooks_.dropout, variant_key(c))));
    ++result_.stats.clause_embeddings;
  }

  std::size_t pick_by_heuristic() {
    const std::size_t round = config_.age_weight_ratio + 1;
    const bool age_pick = picks_++ % round == 0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < unprocessed_.size(); ++i) {
      const Clause& a = store_[unprocessed_[i]];
      const Clause& b = store_[unprocessed_[best]];
      bool better;
      if (age_pick) {
        better = a.id < b.id;
      } else {
        const auto secondary = [this](const Clause& c) {
          return config_.tie_break == TieBreak::Weight ? c.literals.size() : std::size_t{0};
        };
        better = std::make_tuple(a.weight(), secondary(a), a.id) < std::make_tuple(b.weight(), secondary(b), b.id);
      }
      if (better) best = i;
    }
    return best;
  }

  std::size_t pick_by_policy() {
    if (!model_) throw ConfigError("policy guidance requires a model");
    std::vector<Vector> candidate_vecs;
    std::vector<const Clause*> candidates;
    candidate_vecs.reserve(unprocessed_.size());
    for (ClauseId id : unprocessed_) {
      candidate_vecs.push_back(embeddings_.at(id));
      candidates.push_back(&store_[id]);
    }

    std::vector<Vector> state_vecs;
    std::vector<const Clause*> state;
    if (!processed_.empty()) {
      for (ClauseId id : processed_) {
        state_vecs.push_back(embeddings_.at(id));
        state.push_back(&store_[id]);
      }
    } else {
      for (std::size_t i = 0; i < problem_.clauses.size(); ++i) {
        if (store_[i].role != ClauseRole::NegatedConjecture) continue;
        embed(static_cast<ClauseId>(i));
        state_vecs.push_back(embeddings_.at(static_cast<ClauseId>(i)));
        state.push_back(&store_[i]);
      }
    }
    const Vector summary = state_summary({}, state_vecs, model_->dim);
    const auto scores = score(summary, candidate_vecs, model_->policy);
    const auto probs = softmax_t(scores, config_.temperature);
    const std::size_t chosen = select(probs, config_.select_mode, rng_);
    if (hooks_.on_decision) {
      DecisionView view;
      view.candidates = candidates;
      view.state = state;
      view.probabilities = probs;
      view.chosen = chosen;
      view.log_prob = log_softmax_t(scores, config_.temperature, chosen);
      view.temperature = config_.temperature;
      hooks_.on_decision(view);
    }
    return chosen;
  }

  void process(std::size_t pick) {
    const ClauseId given_id = unprocessed_[pick];
    unprocessed_.erase(unprocessed_.begin() + static_cast<std::ptrdiff_t>(pick));
    processed_.push_back(given_id);
    result_.given_sequence.push_back(given_id);
    ++result_.stats.steps;

    // Copy: the store may grow while we add conclusions.
    const Clause given = store_[given_id];
    for (auto& f : factors(given)) {
      if (add_derived(std::move(f), InferenceRule::Factoring)) return;
    }
    for (std::size_t i = 0; i < processed_.size(); ++i) {
      const Clause partner = store_[processed_[i]];
      for (auto& r : resolvents(given, partner, config_.literal_selection)) {
        if (add_derived(std::move(r), InferenceRule::Resolution)) return;
      }
    }
  }

  // Returns true once the empty clause has been derived.
  bool add_derived(Clause c, InferenceRule rule) {
    ++result_.stats.generated;
    if (c.literals.size() > config_.max_literals || c.weight() > config_.max_weight) {
      ++result_.stats.oversized;
      return false;
    }
    if (is_tautology(c)) {
      ++result_.stats.tautologies;
      return false;
    }
    std::string key = variant_key(c);
    if (!seen_.insert(key).second) {
      ++result_.stats.duplicates;
      return false;
    }
    c.id = static_cast<ClauseId>(store_.size());
    c.role = ClauseRole::Derived;
    store_.push_back(std::move(c));
    rules_.push_back(rule);
    ++result_.stats.kept;
    const ClauseId id = store_.back().id;
    if (store_.back().is_empty()) {
      empty_clause_ = id;
      return true;
    }
    if (model_ && config_.guidance == GuidanceKind::Policy) embed(id);
    insert_unprocessed(id);
    return false;
  }

  void extract_proof(ClauseId root) {
    std::set<ClauseId> needed;
    std::vector<ClauseId> work{root};
    while (!work.empty()) {
      const ClauseId id = work.back();
      work.pop_back();
      if (!needed.insert(id).second) continue;
      for (ClauseId p : store_[id].parents) work.push_back(p);
    }
    for (ClauseId id : needed) result_.proof.push_back(ProofStep{store_[id], rules_[id]});
  }

  const Problem& problem_;
  const ProverConfig& config_;
  const ModelParams* model_;
  const SaturateHooks& hooks_;
  Rng rng_;

  std::deque<Clause> store_;  // index == clause id
  std::vector<InferenceRule> rules_;
  std::unordered_set<std::string> seen_;
  std::vector<ClauseId> unprocessed_;  // presentation order
  std::vector<ClauseId> processed_;    // selection order
  std::unordered_map<ClauseId, Vector> embeddings_;
  SymbolEmbeddings symbols_;
  std::optional<ClauseId> empty_clause_;
  std::size_t picks_ = 0;
  ProofResult result_;
};

}  // namespace

ProofResult saturate(const Problem& problem, const ProverConfig& config, const ModelParams* model,
                     const SaturateHooks& hooks) {
  config.validate();
  if (config.guidance == GuidanceKind::Policy && !model) throw ConfigError("policy guidance requires a checkpoint");
  return Saturation(problem, config, model, hooks).run();
}

ReplayReport replay_proof(const ProofResult& result, const Problem& problem) {
  auto fail = [](std::size_t step, std::string message) { return ReplayReport{false, step, std::move(message)}; };
  if (result.status != ProofStatus::Unsatisfiable) return fail(0, "result is not a refutation");
  if (result.proof.empty()) return fail(0, "empty proof");

  std::unordered_map<ClauseId, const Clause*> verified;
  for (std::size_t i = 0; i < result.proof.size(); ++i) {
    const ProofStep& step = result.proof[i];
    const Clause& c = step.clause;
    auto parent = [&](std::size_t k) -> const Clause* {
      if (k >= c.parents.size()) return nullptr;
      auto it = verified.find(c.parents[k]);
      return it == verified.end() ? nullptr : it->second;
    };
    const std::string key = variant_key(c);
    auto matches = [&](const std::vector<Clause>& candidates) {
      return std::any_of(candidates.begin(), candidates.end(), [&](const Clause& d) {
        return d.literals.size() == c.literals.size() && variant_key(d) == key;
      });
    };

    switch (step.rule) {
      case InferenceRule::Input: {
        if (c.id >= problem.clauses.size()) return fail(i, "input id out of range");
        Clause source = problem.clauses[c.id];
        canonicalize(source);
        if (variant_key(source) != key) return fail(i, "input clause differs from the problem");
        break;
      }
      case InferenceRule::Factoring: {
        const Clause* p = parent(0);
        if (c.parents.size() != 1 || !p) return fail(i, "factoring parent missing or not yet derived");
        if (!matches(factors(*p))) return fail(i, "conclusion is not a factor of its parent");
        break;
      }
      case InferenceRule::Resolution: {
        const Clause* a = parent(0);
        const Clause* b = parent(1);
        if (c.parents.size() != 2 || !a || !b) return fail(i, "resolution parents missing or not yet derived");
        if (!matches(resolvents(*a, *b, LiteralSelection::All))) {
          return fail(i, "conclusion is not a resolvent of its parents");
        }
        break;
      }
    }
    verified[c.id] = &c;
  }
  if (!result.proof.back().clause.is_empty()) return fail(result.proof.size() - 1, "proof does not end in $false");
  return ReplayReport{true, result.proof.size(), {}};
}

bool verify_saturation(std::span<const Clause> processed, LiteralSelection selection) {
  std::unordered_set<std::string> keys;
  for (const auto& c : processed) keys.insert(variant_key(c));
  auto redundant = [&](const Clause& c) { return is_tautology(c) || keys.count(variant_key(c)) != 0; };
  for (const auto& a : processed) {
    for (const auto& f : factors(a)) {
      if (!redundant(f)) return false;
    }
    for (const auto& b : processed) {
      for (const auto& r : resolvents(a, b, selection)) {
        if (!redundant(r)) return false;
      }
    }
  }
  return true;
}

}  // namespace saturn
