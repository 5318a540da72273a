#pragma once

// Substitution, unification and the binary resolution calculus.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saturn/tptp.hpp"

namespace saturn {

/// Variable bindings. Parent clauses are renamed apart before unification, so a plain
/// variable index identifies the owning clause. Bindings may be triangular while a
/// unifier is being built; `resolved()` yields the idempotent form.
class Substitution {
 public:
  const Term* lookup(VarIndex var) const;
  void bind(VarIndex var, Term value) { bindings_.insert_or_assign(var, std::move(value)); }
  bool bound(VarIndex var) const { return bindings_.count(var) != 0; }
  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }
  const std::map<VarIndex, Term>& bindings() const noexcept { return bindings_; }

  Term apply(const Term& term) const;
  Literal apply(const Literal& literal) const;

  /// Every binding fully applied, so applying twice equals applying once.
  Substitution resolved() const;

 private:
  std::map<VarIndex, Term> bindings_;
};

/// Extends `subst` to unify a and b (Robinson's algorithm, occurs check on).
/// On failure `subst` is left in an unspecified but valid state.
bool unify_into(const Term& a, const Term& b, Substitution& subst);

/// Most general unifier in resolved form, or nullopt.
std::optional<Substitution> unify(const Term& a, const Term& b);
/// Unifies the atoms of two literals; polarity is ignored.
std::optional<Substitution> unify(const Literal& a, const Literal& b);

enum class LiteralSelection { All, NegativeOnly, MaxWeight };

const char* to_string(LiteralSelection selection);
std::optional<LiteralSelection> parse_literal_selection(const std::string& text);

/// Indices of the literals that may take part in a resolution inference.
///   All:          every literal.
///   NegativeOnly: all negative literals if there is one, otherwise every literal.
///   MaxWeight:    the heaviest negative literal (lowest index on ties) if there is one,
///                 otherwise every literal.
std::vector<std::size_t> eligible_literals(const Clause& clause, LiteralSelection selection);

/// Shifts the second clause's variables past the first's.
std::pair<Clause, Clause> rename_apart(const Clause& first, const Clause& second);

/// Binary resolvents of `given` against `partner`. Both are renamed apart internally, so
/// passing the same clause twice yields self-resolvents. Every result is canonical with
/// duplicate literals merged; parents are {given.id, partner.id}.
std::vector<Clause> resolvents(const Clause& given, const Clause& partner, LiteralSelection selection);

/// Binary factors: one per unifiable same-polarity literal pair.
std::vector<Clause> factors(const Clause& clause);

/// True iff the clause contains l and ~l with syntactically identical atoms.
bool is_tautology(const Clause& clause);

/// Removes syntactically repeated literals, keeping first occurrences.
void merge_duplicate_literals(Clause& clause);

/// Byte key equal for two clauses iff they are equal up to variable renaming and literal
/// order. Exact unless the search over tied literals needs more than
/// kVariantSearchBudget nodes; such clauses fall back to their input order for ties.
std::string variant_key(const Clause& clause);
inline constexpr std::size_t kVariantSearchBudget = 1000;

bool variant_equal(const Clause& a, const Clause& b);

}  // namespace saturn
