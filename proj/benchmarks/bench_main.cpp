#include <benchmark/benchmark.h>

#include "saturn/gnn.hpp"
#include "saturn/graph.hpp"
#include "saturn/logic.hpp"
#include "saturn/prover.hpp"

using namespace saturn;

namespace {

// f(g(X, h(Y)), ..., a) nested to `depth`
Term nested(SymbolTable& t, int depth, std::uint32_t var) {
  if (depth == 0) return Term::variable(var);
  const SymbolId f = t.intern("f", SymbolKind::Function, 2);
  const SymbolId a = t.intern("a", SymbolKind::Constant, 0);
  return Term::app(f, {nested(t, depth - 1, var), Term::app(a, {})});
}

Problem chain(std::size_t length) {
  std::string text = "cnf(base, axiom, p0(c)).\n";
  for (std::size_t i = 0; i < length; ++i) {
    text += "cnf(s" + std::to_string(i) + ", axiom, ~p" + std::to_string(i) + "(X) | p" + std::to_string(i + 1) +
            "(g(X))).\n";
    text += "cnf(d" + std::to_string(i) + ", axiom, q" + std::to_string(i) + "(X) | ~r(X)).\n";
  }
  text += "cnf(goal, negated_conjecture, ~p" + std::to_string(length) + "(X)).\n";
  return parse_problem(text, "chain");
}

}  // namespace

static void BM_Unify(benchmark::State& state) {
  SymbolTable t;
  const int depth = static_cast<int>(state.range(0));
  const Term a = nested(t, depth, 0);
  const Term b = nested(t, depth, 1);
  for (auto _ : state) {
    auto s = unify(a, b);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Unify)->Arg(4)->Arg(16)->Arg(64);

static void BM_SaturateHeuristic(benchmark::State& state) {
  const Problem p = chain(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = saturate(p, {});
    benchmark::DoNotOptimize(r.status);
  }
}
BENCHMARK(BM_SaturateHeuristic)->Arg(4)->Arg(16);

static void BM_SaturatePolicy(benchmark::State& state) {
  const Problem p = chain(static_cast<std::size_t>(state.range(0)));
  const ModelParams m = init_params(kDefaultDim, 1);
  ProverConfig cfg;
  cfg.guidance = GuidanceKind::Policy;
  for (auto _ : state) {
    auto r = saturate(p, cfg, &m);
    benchmark::DoNotOptimize(r.status);
  }
}
BENCHMARK(BM_SaturatePolicy)->Arg(4)->Arg(8);

static void BM_GnnForward(benchmark::State& state) {
  const Problem p = chain(static_cast<std::size_t>(state.range(0)));
  const TheoryGraph g = build_theory_graph(p);
  const ModelParams m = init_params(kDefaultDim, 1);
  const NodeEmbeddings init = initial_embeddings(g, m);
  for (auto _ : state) {
    auto out = forward(g, m, init);
    benchmark::DoNotOptimize(out);
  }
  state.counters["nodes"] = static_cast<double>(g.nodes.size());
}
BENCHMARK(BM_GnnForward)->Arg(4)->Arg(32);

BENCHMARK_MAIN();
