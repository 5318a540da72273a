// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "saturn/ensemble.hpp"
#include "saturn/gnn.hpp"
#include "saturn/graph.hpp"
#include "saturn/prover.hpp"
#include "saturn/train.hpp"

namespace fs = std::filesystem;
using namespace saturn;
namespace gen = saturn::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& why) {
    if (!cond && ok) {
      ok = false;
      detail = why;
    }
  }
};

double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string fmt_sci(double x) {
  std::ostringstream out;
  out << std::scientific << std::setprecision(2) << x;
  return out.str();
}

std::string run_cli(const std::vector<std::string>& args, int* code = nullptr) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (code) *code = rc;
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome name_invariance() {
  Outcome o;
  Rng rng(20201);
  const ModelParams m = init_params(kDefaultDim, 17);
  ProverConfig cfg;
  cfg.guidance = GuidanceKind::Policy;
  cfg.step_limit = 20;
  // some draws factor into tens of thousands of clauses within 20 steps
  cfg.max_literals = 12;
  cfg.max_weight = 80;
  double worst = 0.0;
  for (int i = 0; i < 200 && o.ok; ++i) {
    const Problem p = gen::random_problem(rng);
    const Problem q = gen::rename_symbols(p, rng);
    const auto sp = symbol_embeddings(build_theory_graph(p), m);
    const auto sq = symbol_embeddings(build_theory_graph(q), m);
    for (std::size_t k = 0; k < p.clauses.size(); ++k) {
      worst = std::max(worst, max_abs_diff(clause_embedding(p.clauses[k], m, sp), clause_embedding(q.clauses[k], m, sq)));
    }
    o.require(worst <= 1e-9, "embedding differs by " + fmt_sci(worst) + " on problem " + std::to_string(i));
    const ProofResult a = saturate(p, cfg, &m);
    const ProofResult b = saturate(q, cfg, &m);
    o.require(a.given_sequence == b.given_sequence, "given-clause choices differ on problem " + std::to_string(i));
  }
  if (o.ok) o.detail = "200 problems, max diff " + fmt_sci(worst);
  return o;
}

Outcome variable_literal_invariance() {
  Outcome o;
  Rng rng(5150);
  const ModelParams m = init_params(kDefaultDim, 3);
  double worst = 0.0;
  for (int i = 0; i < 500 && o.ok; ++i) {
    const gen::Signature sig = gen::make_signature(rng, 3, 2, 2);
    Clause c = gen::random_clause(rng, sig, 4, 3, 3);
    canonicalize(c);
    Problem p;
    p.symbols = sig.table;
    p.clauses.push_back(c);
    const auto sym = symbol_embeddings(build_theory_graph(p), m);
    const Vector base = clause_embedding(c, m, sym);

    Clause renamed = gen::rename_variables(c, rng);
    canonicalize(renamed);
    o.require(clause_embedding(renamed, m, sym) == base, "variable renaming changed clause " + std::to_string(i));

    const Clause shuffled = gen::shuffle_literals(c, rng);
    const double d = max_abs_diff(clause_embedding(shuffled, m, sym), base);
    worst = std::max(worst, d);
    o.require(d <= 1e-12, "literal permutation moved clause " + std::to_string(i) + " by " + std::to_string(d));
  }
  if (o.ok) o.detail = "500 clauses, permutation max diff " + fmt_sci(worst);
  return o;
}

Outcome sharing_exactness() {
  Outcome o;
  Rng rng(909);
  std::size_t shared_total = 0;
  for (int i = 0; i < 100 && o.ok; ++i) {
    const Problem p = gen::random_problem(rng);
    const TheoryGraph tg = build_theory_graph(p);
    std::map<SymbolId, std::set<std::size_t>> users;
    auto mark = [&](auto&& self, const Term& t, std::size_t k) -> void {
      if (t.is_var()) return;
      users[t.symbol()].insert(k);
      for (const auto& a : t.args()) self(self, a, k);
    };
    for (std::size_t k = 0; k < p.clauses.size(); ++k) {
      for (const auto& l : p.clauses[k].literals) {
        users[l.predicate].insert(k);
        for (const auto& a : l.args) mark(mark, a, k);
      }
    }
    std::vector<NodeId> want;
    for (const auto& [sym, clauses] : users) {
      if (clauses.size() >= 2) want.push_back(tg.name_index.at(sym));
    }
    std::sort(want.begin(), want.end());
    const auto shared = cross_clause_shared_nodes(tg);
    shared_total += shared.size();
    o.require(shared == want, "shared set differs on problem " + std::to_string(i));
    for (NodeId v : shared) o.require(is_name_kind(tg.nodes[v].kind), "non-name node shared on problem " + std::to_string(i));
  }
  if (o.ok) o.detail = "100 problems, " + std::to_string(shared_total) + " shared nodes, all NAME";
  return o;
}

Outcome seeding_effect() {
  Outcome o;
  Rng rng(77);
  const ModelParams m = init_params(kDefaultDim, 2);
  std::size_t differ = 0, total = 0;
  while (total < 500) {
    const Problem p = gen::random_problem(rng);
    const auto sym = symbol_embeddings(build_theory_graph(p), m);
    for (const auto& c : p.clauses) {
      ++total;
      differ += l2_distance(clause_embedding(c, m, sym), clause_embedding(c, m, {})) > 1e-6;
    }
  }
  const double frac = static_cast<double>(differ) / static_cast<double>(total);
  o.require(frac >= 0.95, "only " + std::to_string(frac) + " of clauses differ");
  o.detail = std::to_string(differ) + "/" + std::to_string(total) + " clauses differ";
  return o;
}

Outcome soundness() {
  Outcome o;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(std::string(SATURN_TEST_DIR) + "/corpus")) {
    if (e.path().extension() == ".p") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  o.require(files.size() == 25, "corpus has " + std::to_string(files.size()) + " problems");
  std::size_t unsat = 0, sat = 0, open = 0;
  for (const auto& f : files) {
    const Problem p = parse_problem_file(f);
    const ProofResult r = saturate(p, {});
    if (r.status == ProofStatus::Unsatisfiable) {
      ++unsat;
      const auto report = replay_proof(r, p);
      o.require(static_cast<bool>(report), p.name + ": replay failed: " + report.message);
    } else if (r.status == ProofStatus::Saturated) {
      ++sat;
      o.require(verify_saturation(r.processed, LiteralSelection::All), p.name + ": not saturated");
    } else {
      ++open;
    }
  }
  if (o.ok) {
    o.detail = std::to_string(unsat) + " refutations replayed, " + std::to_string(sat) + " saturations checked, " +
               std::to_string(open) + " open";
  }
  return o;
}

Outcome gradient_check() {
  Outcome o;
  int code = -1;
  const std::string out = run_cli({"check-grad", "--dim", "8", "--max-nodes", "20"}, &code);
  const auto at = out.find("max_relative_error=");
  o.require(at != std::string::npos, "no max_relative_error line");
  if (!o.ok) return o;
  const double err = std::stod(out.substr(at + 19));
  o.require(err < 1e-4, "max relative error " + std::to_string(err));
  o.require(code == 0, "exit code " + std::to_string(code));
  std::size_t blocks = 0;
  for (char ch : out) blocks += ch == '\n';
  if (o.ok) {
    std::ostringstream d;
    d << "max relative error " << err << " over " << blocks - 2 << " block checks";
    o.detail = d.str();
  }
  return o;
}

Outcome reward_contract() {
  Outcome o;
  const HyperParams hp;
  o.require(hp.reward_min == 1.0 && hp.reward_max == 2.0, "reward bounds are not 1.0/2.0");
  for (std::size_t b = 1; b <= 200 && o.ok; ++b) {
    for (std::size_t a = 1; a <= 200; ++a) {
      const double want = gen::clamp_oracle(static_cast<double>(b) / static_cast<double>(a), 1.0, 2.0);
      if (compute_reward(b, a, hp) != want) {
        o.require(false, "mismatch at " + std::to_string(b) + "/" + std::to_string(a));
        break;
      }
    }
  }
  if (o.ok) o.detail = "40000 grid points";
  return o;
}

Outcome ensemble_accounting() {
  Outcome o;
  const auto budgets = branch_budgets(4, 100.0, BudgetMode::Steps);
  o.require(budgets == std::vector<double>(4, 25.0), "budgets are not 4 x 25");

  const auto problems = gen::chain_corpus(8, 31);
  EnsembleSpec spec;
  spec.branches = 4;
  spec.total_budget = 100;
  spec.mode = BudgetMode::Steps;
  spec.configs = make_configs(4);
  const EnsembleResult run = run_ensemble(problems, spec);
  o.require(run.budgets == std::vector<double>(4, 25.0), "run_ensemble budgets are not 4 x 25");
  for (const auto& branch : run.branches) {
    for (const auto& out : branch) o.require(out.steps <= 25, out.problem + " exceeded its branch budget");
  }

  Rng rng(4242);
  const std::vector<ProofStatus> statuses{ProofStatus::Unsatisfiable, ProofStatus::Saturated, ProofStatus::Timeout,
                                          ProofStatus::StepLimit};
  for (int r = 0; r < 50; ++r) {
    std::vector<std::vector<BranchOutcome>> branches(4);
    for (std::size_t b = 0; b < 4; ++b) {
      for (int p = 0; p < 20; ++p) {
        branches[b].push_back({"p" + std::to_string(p), b, statuses[rng.below(statuses.size())]});
      }
    }
    EnsembleResult res;
    res.branches = branches;
    res.solved_union = union_solved(branches);
    std::size_t best = 0;
    for (std::size_t b = 0; b < 4; ++b) best = std::max(best, res.solved_by(b).size());
    o.require(res.solved_union.size() >= best, "union smaller than a branch in run " + std::to_string(r));
  }
  if (o.ok) o.detail = "budgets 25/25/25/25, union dominance on 50 runs";
  return o;
}

Outcome training_smoke() {
  Outcome o;
  const auto problems = gen::chain_corpus(30, 2024);
  const HyperParams hp;
  const TrainResult r = train_loop(problems, hp, 1);
  o.require(r.iterations.size() == 5, "expected 5 iterations");
  for (const auto& it : r.iterations) {
    const double want = 3.0 * std::pow(0.89, static_cast<double>(it.iteration));
    o.require(std::abs(it.temperature - want) < 1e-12, "tau off schedule at iteration " + std::to_string(it.iteration));
    o.require(it.epoch_losses.size() == hp.epochs, "wrong epoch count");
    for (double l : it.epoch_losses) o.require(std::isfinite(l), "non-finite loss");
  }
  o.require(r.solved.size() == 6, "expected 6 solved counts");
  if (r.solved.size() == 6) o.require(r.solved[5] >= r.solved[0], "solved count fell");
  std::ostringstream d;
  d << "solved per iteration";
  for (auto s : r.solved) d << ' ' << s;
  d << " of " << problems.size();
  if (o.ok) o.detail = d.str();
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::string corpus = std::string(SATURN_TEST_DIR) + "/corpus/";
  for (const char* name : {"group_left_identity.p", "nat_plus.p", "sat_datalog.p"}) {
    const std::vector<std::string> args{"prove", corpus + name, "--seed", "3", "--steps", "500"};
    o.require(run_cli(args) == run_cli(args), std::string("prove output differs on ") + name);
  }

  const fs::path root = fs::temp_directory_path() / "saturn_acceptance_det";
  fs::remove_all(root);
  gen::write_problem_dir(root / "problems", gen::chain_corpus(6, 8));
  const std::vector<std::string> args{"train",  (root / "problems").string(), "--out", (root / "out").string(),
                                      "--seed", "11", "--iterations", "2", "--epochs", "3", "--dim", "16"};
  const std::string first = run_cli(args);
  std::map<std::string, std::string> artifacts;
  for (const auto& e : fs::directory_iterator(root / "out")) artifacts[e.path().filename().string()] = slurp(e.path());
  fs::remove_all(root / "out");
  const std::string second = run_cli(args);
  o.require(first == second, "train output differs");
  std::size_t compared = 0;
  for (const auto& [file, bytes] : artifacts) {
    o.require(slurp(root / "out" / file) == bytes, "artifact " + file + " differs");
    ++compared;
  }
  o.require(artifacts.count("model.ckpt") == 1, "no model.ckpt written");
  fs::remove_all(root);
  if (o.ok) o.detail = "3 prove runs and " + std::to_string(compared) + " train artifacts identical";
  return o;
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"name-invariance", 120, name_invariance},
      {"variable-literal-invariance", 30, variable_literal_invariance},
      {"sharing-exactness", 30, sharing_exactness},
      {"symbol-seeding-effect", 30, seeding_effect},
      {"soundness", 120, soundness},
      {"gradient-check", 60, gradient_check},
      {"reward-contract", 5, reward_contract},
      {"ensemble-accounting", 30, ensemble_accounting},
      {"training-smoke", 600, training_smoke},
      {"determinism", 60, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && secs > c.limit_seconds) {
      o.ok = false;
      o.detail += " (over time limit)";
    }
    failures += !o.ok;
    std::printf("%s %s: %s [%.1fs / %.0fs]\n", o.ok ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
