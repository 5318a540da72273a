#include <gtest/gtest.h>

#include "generators.hpp"
#include "saturn/error.hpp"
#include "saturn/logic.hpp"
#include "saturn/tptp.hpp"

using namespace saturn;
namespace gen = saturn::testing;

TEST(Parse, MinimalClause) {
  const Problem p = parse_problem("cnf(a1, axiom, p(X)).");
  ASSERT_EQ(p.clauses.size(), 1u);
  const Clause& c = p.clauses[0];
  ASSERT_EQ(c.literals.size(), 1u);
  EXPECT_FALSE(c.literals[0].negated);
  ASSERT_EQ(p.symbols.size(), 1u);
  EXPECT_EQ(p.symbols.at(0).display_name, "p");
  EXPECT_EQ(p.symbols.at(0).arity, 1u);
  EXPECT_EQ(p.symbols.at(0).kind, SymbolKind::Predicate);
  ASSERT_TRUE(c.literals[0].args[0].is_var());
  EXPECT_EQ(c.literals[0].args[0].var(), 0u);
  EXPECT_EQ(c.role, ClauseRole::Axiom);
  EXPECT_EQ(c.name, "a1");
}

TEST(Parse, FigureOneClause) {
  const Problem p = parse_problem("cnf(c1, axiom, (p(A) | ~q(B,f(A)) | q(C,f(A)))).");
  ASSERT_EQ(p.clauses.size(), 1u);
  const Clause& c = p.clauses[0];
  ASSERT_EQ(c.literals.size(), 3u);
  EXPECT_TRUE(c.literals[1].negated);

  const auto pid = p.symbols.find("p");
  const auto qid = p.symbols.find("q");
  const auto fid = p.symbols.find("f");
  ASSERT_TRUE(pid && qid && fid);
  EXPECT_EQ(p.symbols.at(*pid).arity, 1u);
  EXPECT_EQ(p.symbols.at(*qid).arity, 2u);
  EXPECT_EQ(p.symbols.at(*fid).kind, SymbolKind::Function);

  // A, B, C -> 0, 1, 2 by first occurrence
  EXPECT_EQ(c.literals[0].args[0].var(), 0u);
  EXPECT_EQ(c.literals[1].args[0].var(), 1u);
  EXPECT_EQ(c.literals[1].args[1].args()[0].var(), 0u);
  EXPECT_EQ(c.literals[2].args[0].var(), 2u);
  EXPECT_TRUE(is_canonical(c));
}

TEST(Parse, UnterminatedStatement) {
  try {
    parse_problem("cnf(x, axiom, p(X)");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unterminated statement"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Parse, ErrorCarriesLocation) {
  try {
    parse_problem("cnf(a, axiom, p(a)).\ncnf(b, axiom, p(a) | ).\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 1u);
  }
}

TEST(Parse, ArityConflict) {
  EXPECT_THROW(parse_problem("cnf(a, axiom, p(a)).\ncnf(b, axiom, p(a, b))."), ArityConflict);
  EXPECT_THROW(parse_problem("cnf(a, axiom, p(f(a))).\ncnf(b, axiom, f(a))."), ArityConflict);
  EXPECT_THROW(parse_problem("cnf(a, axiom, p(a)).\ncnf(b, axiom, q(a(b)))."), ArityConflict);
}

TEST(Parse, RolesAndComments) {
  const Problem p = parse_problem(
      "% leading comment\n"
      "cnf(h, hypothesis, p(a)). % trailing\n"
      "cnf(g, negated_conjecture, ~p(a)).\n");
  ASSERT_EQ(p.clauses.size(), 2u);
  EXPECT_EQ(p.clauses[0].role, ClauseRole::Axiom);
  EXPECT_EQ(p.clauses[1].role, ClauseRole::NegatedConjecture);
  EXPECT_THROW(parse_problem("cnf(x, conjecture, p(a))."), ParseError);
}

TEST(Parse, FalseIsEmptyClause) {
  const Problem p = parse_problem("cnf(f, axiom, $false).");
  ASSERT_EQ(p.clauses.size(), 1u);
  EXPECT_TRUE(p.clauses[0].is_empty());
}

TEST(Parse, EmptyInput) {
  const Problem p = parse_problem("  % nothing here\n");
  EXPECT_TRUE(p.clauses.empty());
  EXPECT_TRUE(p.symbols.empty());
}

TEST(Parse, InterningSharesIds) {
  const Problem p = parse_problem("cnf(a, axiom, p(a) | p(f(a))).\ncnf(b, axiom, ~p(a)).");
  EXPECT_EQ(p.symbols.size(), 3u);
  EXPECT_EQ(p.clauses[0].literals[0].predicate, p.clauses[1].literals[0].predicate);
}

TEST(Render, EmptyClause) {
  Clause c;
  EXPECT_EQ(render_formula(c, SymbolTable{}), "$false");
  EXPECT_NE(render_clause(c, SymbolTable{}).find("$false"), std::string::npos);
}

TEST(Render, SingleLiteral) {
  const Problem p = parse_problem("cnf(a1, axiom, p(Y)).");
  const std::string text = render_clause(p.clauses[0], p.symbols);
  EXPECT_NE(text.find("p(X0)"), std::string::npos) << text;
  EXPECT_EQ(text.rfind("cnf(", 0), 0u);
}

TEST(Render, FigureOneRoundTrip) {
  const Problem p = parse_problem("cnf(c1, axiom, (p(A) | ~q(B,f(A)) | q(C,f(A)))).");
  const Problem back = parse_problem(render_clause(p.clauses[0], p.symbols));
  ASSERT_EQ(back.clauses.size(), 1u);
  // same symbol order of first use, so ids agree and keys are comparable
  EXPECT_EQ(variant_key(back.clauses[0]), variant_key(p.clauses[0]));
}

TEST(RenderProperty, RoundTripRandomClauses) {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const Problem p = gen::random_problem(rng);
    std::string text;
    for (const auto& c : p.clauses) text += render_clause(c, p.symbols) + "\n";
    const Problem back = parse_problem(text);
    ASSERT_EQ(back.clauses.size(), p.clauses.size());
    for (std::size_t k = 0; k < p.clauses.size(); ++k) {
      // symbols may be interned in a different order, so compare through names
      Clause mapped = back.clauses[k];
      std::vector<SymbolId> to_original(back.symbols.size());
      for (const auto& s : back.symbols) to_original[s.id] = *p.symbols.find(s.display_name);
      mapped = gen::map_symbols(mapped, to_original);
      EXPECT_TRUE(variant_equal(mapped, p.clauses[k])) << text;
      EXPECT_EQ(back.clauses[k].role, p.clauses[k].role);
    }
  }
}

TEST(CanonicalProperty, Idempotent) {
  Rng rng(5);
  const auto sig = gen::make_signature(rng, 3, 2, 2);
  for (int i = 0; i < 500; ++i) {
    Clause c = gen::rename_variables(gen::random_clause(rng, sig, 4, 3, 4), rng);
    canonicalize(c);
    EXPECT_TRUE(is_canonical(c));
    Clause again = c;
    canonicalize(again);
    EXPECT_EQ(again.literals, c.literals);
  }
}
