#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "generators.hpp"
#include "oracles.hpp"
#include "saturn/logic.hpp"

using namespace saturn;
namespace gen = saturn::testing;

namespace {

Problem P(const char* text) { return parse_problem(text); }

Term var(VarIndex v) { return Term::variable(v); }

// Consistent bijective variable renaming between two terms, built by hand.
bool term_variant(const Term& a, const Term& b, std::map<VarIndex, VarIndex>& fwd, std::map<VarIndex, VarIndex>& bwd) {
  if (a.is_var() != b.is_var()) return false;
  if (a.is_var()) {
    auto [f, fnew] = fwd.emplace(a.var(), b.var());
    auto [g, gnew] = bwd.emplace(b.var(), a.var());
    return f->second == b.var() && g->second == a.var();
  }
  if (a.symbol() != b.symbol() || a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    if (!term_variant(a.args()[i], b.args()[i], fwd, bwd)) return false;
  }
  return true;
}

// Tries every literal permutation of b.
bool variant_oracle(const Clause& a, const Clause& b) {
  if (a.literals.size() != b.literals.size()) return false;
  std::vector<std::size_t> perm(b.literals.size());
  std::iota(perm.begin(), perm.end(), 0u);
  do {
    std::map<VarIndex, VarIndex> fwd, bwd;
    bool ok = true;
    for (std::size_t i = 0; ok && i < perm.size(); ++i) {
      const Literal& x = a.literals[i];
      const Literal& y = b.literals[perm[i]];
      ok = x.negated == y.negated && x.predicate == y.predicate && x.args.size() == y.args.size();
      for (std::size_t k = 0; ok && k < x.args.size(); ++k) ok = term_variant(x.args[k], y.args[k], fwd, bwd);
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Replaces random subterms of t by variables below `bound`.
Term abstract(const Term& t, Rng& rng, VarIndex bound) {
  if (rng.below(4) == 0) return var(static_cast<VarIndex>(rng.below(bound)));
  if (t.is_var()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(abstract(a, rng, bound));
  return Term::app(t.symbol(), std::move(args));
}

}  // namespace

TEST(RenameApart, ShiftsSecondClause) {
  const Problem p = P("cnf(a, axiom, p(X)).\ncnf(b, axiom, q(X)).");
  const auto [first, second] = rename_apart(p.clauses[0], p.clauses[1]);
  EXPECT_EQ(first.literals, p.clauses[0].literals);
  EXPECT_EQ(second.literals[0].args[0].var(), 1u);
}

TEST(RenameApart, GroundUnchanged) {
  const Problem p = P("cnf(a, axiom, p(a)).\ncnf(b, axiom, q(b)).");
  const auto [first, second] = rename_apart(p.clauses[0], p.clauses[1]);
  EXPECT_EQ(first.literals, p.clauses[0].literals);
  EXPECT_EQ(second.literals, p.clauses[1].literals);
}

TEST(RenameApart, FigureOnePair) {
  const Problem p = P(
      "cnf(c1, axiom, p(A) | ~q(B,f(A)) | q(C,f(A))).\n"
      "cnf(c2, axiom, q(f(X),Y) | p(f(X))).");
  const auto [first, second] = rename_apart(p.clauses[0], p.clauses[1]);
  EXPECT_EQ(first.var_bound(), 3u);
  // q(f(X3), X4) | p(f(X3))
  EXPECT_EQ(second.literals[0].args[0].args()[0].var(), 3u);
  EXPECT_EQ(second.literals[0].args[1].var(), 4u);
  EXPECT_EQ(second.literals[1].args[0].args()[0].var(), 3u);
}

TEST(Unify, BindsVariableToConstant) {
  const Problem p = P("cnf(a, axiom, p(X)).\ncnf(b, axiom, p(a)).");
  const auto s = unify(p.clauses[0].literals[0], p.clauses[1].literals[0]);
  ASSERT_TRUE(s);
  ASSERT_EQ(s->size(), 1u);
  EXPECT_EQ(s->apply(var(0)), p.clauses[1].literals[0].args[0]);
}

TEST(Unify, OccursCheck) {
  SymbolTable t;
  const SymbolId f = t.intern("f", SymbolKind::Function, 1);
  EXPECT_FALSE(unify(var(0), Term::app(f, {var(0)})));
  EXPECT_FALSE(unify(Term::app(f, {var(0)}), var(0)));
}

TEST(Unify, HandExecutedRobinson) {
  // q(X, f(X)) vs q(g(Y), Z) with X=0, Y=1, Z=2
  SymbolTable t;
  const SymbolId q = t.intern("q", SymbolKind::Predicate, 2);
  const SymbolId f = t.intern("f", SymbolKind::Function, 1);
  const SymbolId g = t.intern("g", SymbolKind::Function, 1);
  const Literal a{false, q, {var(0), Term::app(f, {var(0)})}};
  const Literal b{false, q, {Term::app(g, {var(1)}), var(2)}};
  const auto s = unify(a, b);
  ASSERT_TRUE(s);
  const Term gy = Term::app(g, {var(1)});
  EXPECT_EQ(s->apply(var(0)), gy);
  EXPECT_EQ(s->apply(var(2)), Term::app(f, {gy}));
  EXPECT_EQ(s->apply(var(1)), var(1));
  EXPECT_EQ(s->apply(a), s->apply(b));
}

TEST(Unify, ResolvedFormIsIdempotent) {
  SymbolTable t;
  const SymbolId f = t.intern("f", SymbolKind::Function, 2);
  // f(X, Y) vs f(Y, c) chains X -> Y -> c
  const SymbolId c = t.intern("c", SymbolKind::Constant, 0);
  const auto s = unify(Term::app(f, {var(0), var(1)}), Term::app(f, {var(1), Term::app(c)}));
  ASSERT_TRUE(s);
  for (const auto& [v, value] : s->bindings()) EXPECT_EQ(s->apply(value), value) << v;
}

TEST(UnifyProperty, AgreesWithRobinsonOracleAndIsMostGeneral) {
  Rng rng(21);
  const auto sig = gen::make_signature(rng, 1, 2, 2);
  const auto grounds = gen::ground_terms(sig.table, 1);
  std::size_t unifiable = 0;
  for (int i = 0; i < 3000 && unifiable < 300; ++i) {
    const Term base = gen::random_term(rng, sig, 3, 3);
    const Term a = abstract(base, rng, 3);
    const Term b = rng.below(3) == 0 ? gen::random_term(rng, sig, 3, 3) : abstract(base, rng, 3);

    const auto lib = unify(a, b);
    const auto ref = gen::robinson(a, b);
    ASSERT_EQ(lib.has_value(), ref.has_value());
    if (!lib) continue;
    ++unifiable;

    // soundness
    EXPECT_EQ(lib->apply(a), lib->apply(b));
    // same unifier as the oracle up to variable renaming
    std::map<VarIndex, VarIndex> fwd, bwd;
    EXPECT_TRUE(term_variant(lib->apply(a), gen::substitute(a, *ref), fwd, bwd));

    // every ground unifier theta over vars 0..2 factors through the mgu: theta o sigma = theta
    std::vector<std::pair<VarIndex, Term>> theta(3);
    for (std::size_t x = 0; x < grounds.size(); ++x) {
      for (std::size_t y = 0; y < grounds.size(); ++y) {
        for (std::size_t z = 0; z < grounds.size(); ++z) {
          theta = {{0, grounds[x]}, {1, grounds[y]}, {2, grounds[z]}};
          if (gen::substitute(a, theta) != gen::substitute(b, theta)) continue;
          for (VarIndex v = 0; v < 3; ++v) {
            ASSERT_EQ(gen::substitute(lib->apply(var(v)), theta), gen::substitute(var(v), theta));
          }
        }
      }
    }
  }
  EXPECT_GE(unifiable, 100u);
}

TEST(Resolvents, RefutationStep) {
  const Problem p = P("cnf(a, axiom, p(X)).\ncnf(b, axiom, ~p(a)).");
  const auto r = resolvents(p.clauses[0], p.clauses[1], LiteralSelection::All);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_TRUE(r[0].is_empty());
}

TEST(Resolvents, SinglePair) {
  const Problem p = P("cnf(a, axiom, p(X) | q(X)).\ncnf(b, axiom, ~p(a)).\ncnf(c, axiom, q(a)).");
  const auto r = resolvents(p.clauses[0], p.clauses[1], LiteralSelection::All);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].literals, p.clauses[2].literals);
  EXPECT_EQ(r[0].parents, (std::vector<ClauseId>{p.clauses[0].id, p.clauses[1].id}));
}

TEST(Resolvents, SamePolarityGivesNothing) {
  const Problem p = P("cnf(a, axiom, p(a)).\ncnf(b, axiom, p(b)).");
  EXPECT_TRUE(resolvents(p.clauses[0], p.clauses[1], LiteralSelection::All).empty());
}

TEST(Resolvents, SelfResolution) {
  const Problem p = P("cnf(a, axiom, ~p(X) | p(f(X))).");
  const auto r = resolvents(p.clauses[0], p.clauses[0], LiteralSelection::All);
  ASSERT_FALSE(r.empty());
  const Problem want = P("cnf(a, axiom, ~p(X) | p(f(X))).\ncnf(b, axiom, ~p(X) | p(f(f(X)))).");
  EXPECT_TRUE(std::any_of(r.begin(), r.end(), [&](const Clause& c) { return variant_equal(c, want.clauses[1]); }));
}

TEST(Resolvents, SelectionRestricts) {
  const Problem p = P("cnf(a, axiom, p(a) | ~q(a)).\ncnf(b, axiom, ~p(a)).\ncnf(c, axiom, q(a)).");
  // with negative_only only ~q(a) of clause a is eligible
  EXPECT_TRUE(resolvents(p.clauses[0], p.clauses[1], LiteralSelection::NegativeOnly).empty());
  EXPECT_EQ(resolvents(p.clauses[0], p.clauses[2], LiteralSelection::NegativeOnly).size(), 1u);
  EXPECT_EQ(resolvents(p.clauses[0], p.clauses[1], LiteralSelection::All).size(), 1u);
}

TEST(EligibleLiterals, Rules) {
  const Problem p = P("cnf(a, axiom, p(a) | ~q(f(a)) | ~q(a) | ~q(f(b))).\ncnf(b, axiom, p(a) | q(a)).");
  const Clause& c = p.clauses[0];
  EXPECT_EQ(eligible_literals(c, LiteralSelection::All), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(eligible_literals(c, LiteralSelection::NegativeOnly), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(eligible_literals(c, LiteralSelection::MaxWeight), (std::vector<std::size_t>{1}));
  EXPECT_EQ(eligible_literals(p.clauses[1], LiteralSelection::MaxWeight), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(eligible_literals(p.clauses[1], LiteralSelection::NegativeOnly), (std::vector<std::size_t>{0, 1}));
}

TEST(Factors, Examples) {
  const Problem p = P(
      "cnf(a, axiom, p(X) | p(a)).\n"
      "cnf(b, axiom, p(a) | q(b)).\n"
      "cnf(c, axiom, p(X) | p(f(Y)) | q(X)).\n"
      "cnf(d, axiom, p(a)).\n"
      "cnf(e, axiom, p(f(Y)) | q(f(Y))).");
  const auto fa = factors(p.clauses[0]);
  ASSERT_EQ(fa.size(), 1u);
  EXPECT_TRUE(variant_equal(fa[0], p.clauses[3]));
  EXPECT_TRUE(factors(p.clauses[1]).empty());
  const auto fc = factors(p.clauses[2]);
  ASSERT_EQ(fc.size(), 1u);
  EXPECT_TRUE(variant_equal(fc[0], p.clauses[4]));
}

TEST(Tautology, Examples) {
  const Problem p = P(
      "cnf(a, axiom, p(X) | ~p(X)).\n"
      "cnf(b, axiom, p(X) | ~p(a)).\n"
      "cnf(c, axiom, p(X) | ~p(Y)).");
  EXPECT_TRUE(is_tautology(p.clauses[0]));
  EXPECT_FALSE(is_tautology(p.clauses[1]));
  EXPECT_FALSE(is_tautology(p.clauses[2]));
}

TEST(TautologyProperty, MatchesPairScan) {
  Rng rng(8);
  const auto sig = gen::make_signature(rng, 2, 1, 2);
  int positives = 0;
  for (int i = 0; i < 2000; ++i) {
    const Clause c = gen::random_clause(rng, sig, 4, 1, 1);
    const bool want = gen::tautology_oracle(c);
    positives += want;
    EXPECT_EQ(is_tautology(c), want);
  }
  EXPECT_GT(positives, 10);
}

TEST(ResolutionProperty, GroundResolventsAreEntailed) {
  Rng rng(3);
  const auto sig = gen::make_signature(rng, 2, 0, 2, 1);
  std::size_t checked = 0;
  for (int i = 0; i < 1500; ++i) {
    Clause a = gen::random_ground_clause(rng, sig, 3, 1);
    Clause b = gen::random_ground_clause(rng, sig, 3, 1);
    a.id = 0;
    b.id = 1;
    for (auto sel : {LiteralSelection::All, LiteralSelection::NegativeOnly, LiteralSelection::MaxWeight}) {
      for (const Clause& r : resolvents(a, b, sel)) {
        ++checked;
        EXPECT_TRUE(gen::ground_entails({a, b}, r));
      }
    }
    for (const Clause& f : factors(a)) EXPECT_TRUE(gen::ground_entails({a}, f));
  }
  EXPECT_GT(checked, 300u);
}

TEST(VariantKey, Examples) {
  const Problem p = P("cnf(a, axiom, p(a) | q(b)).\ncnf(b, axiom, q(b) | p(a)).\ncnf(c, axiom, p(X) | q(X)).\n"
                      "cnf(d, axiom, p(X) | q(Y)).");
  Clause x0 = P("cnf(a, axiom, p(X)).").clauses[0];
  Clause x5 = x0;
  x5.literals[0].args[0] = var(5);
  EXPECT_EQ(variant_key(x0), variant_key(x5));
  EXPECT_EQ(variant_key(p.clauses[0]), variant_key(p.clauses[1]));
  EXPECT_NE(variant_key(p.clauses[2]), variant_key(p.clauses[3]));
}

TEST(VariantKeyProperty, InvariantUnderRenamingAndShuffle) {
  Rng rng(13);
  const auto sig = gen::make_signature(rng, 3, 2, 2);
  for (int i = 0; i < 1000; ++i) {
    const Clause c = gen::random_clause(rng, sig, 5, 3, 3);
    const Clause renamed = gen::rename_variables(c, rng);
    const Clause shuffled = gen::shuffle_literals(gen::rename_variables(c, rng), rng);
    EXPECT_EQ(variant_key(c), variant_key(renamed));
    EXPECT_EQ(variant_key(c), variant_key(shuffled));
  }
}

TEST(VariantKeyProperty, EqualKeysIffVariants) {
  // tiny signature so collisions between independent clauses are common
  Rng rng(17);
  const auto sig = gen::make_signature(rng, 1, 1, 1, 1);
  std::vector<Clause> pool;
  for (int i = 0; i < 150; ++i) pool.push_back(gen::random_clause(rng, sig, 3, 2, 2));
  std::size_t equal_pairs = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const bool keys = variant_key(pool[i]) == variant_key(pool[j]);
      ASSERT_EQ(keys, variant_oracle(pool[i], pool[j]));
      equal_pairs += keys && i != j;
    }
  }
  EXPECT_GT(equal_pairs, 0u);
}

TEST(VariantKeyProperty, SymmetricVariableStructures) {
  // many literals that tie on predicate and skeleton; refinement must still find the
  // same key for every shuffle
  const Problem p = P("cnf(a, axiom, r(A,B) | r(B,C) | r(C,D) | r(D,A) | r(A,C) | ~r(B,D) | r(E,E)).");
  Rng rng(2);
  const std::string key = variant_key(p.clauses[0]);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(variant_key(gen::shuffle_literals(gen::rename_variables(p.clauses[0], rng), rng)), key);
  }
}

TEST(MergeDuplicates, KeepsFirst) {
  Clause c = P("cnf(a, axiom, p(X) | q(X) | p(X)).").clauses[0];
  merge_duplicate_literals(c);
  EXPECT_EQ(c.literals.size(), 2u);
}
