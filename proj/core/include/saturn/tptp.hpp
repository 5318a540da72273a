#pragma once

// Symbolic data model for clausal first-order logic and the TPTP-CNF front end.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace saturn {

using SymbolId = std::uint32_t;
using VarIndex = std::uint32_t;
using ClauseId = std::uint32_t;

enum class SymbolKind : std::uint8_t { Predicate, Function, Constant };

const char* to_string(SymbolKind kind);

struct Symbol {
  SymbolId id = 0;
  SymbolKind kind = SymbolKind::Predicate;
  std::uint32_t arity = 0;
  std::string display_name;  // I/O only; nothing on the embedding path reads it.
};

/// Interns (name, kind, arity) triples. A name is bound to exactly one kind and arity.
class SymbolTable {
 public:
  /// Returns the id for the triple, creating it on first use. Returns nullopt when the
  /// name is already bound with a different kind or arity.
  std::optional<SymbolId> try_intern(std::string_view name, SymbolKind kind, std::uint32_t arity);

  /// Like try_intern but throws saturn::Error on a conflict.
  SymbolId intern(std::string_view name, SymbolKind kind, std::uint32_t arity);

  std::optional<SymbolId> find(std::string_view name) const;
  const Symbol& at(SymbolId id) const { return symbols_.at(id); }
  const std::string& name(SymbolId id) const { return symbols_.at(id).display_name; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }

  auto begin() const noexcept { return symbols_.begin(); }
  auto end() const noexcept { return symbols_.end(); }

 private:
  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, SymbolId> by_name_;
};

/// A first-order term: a clause-local variable or a function/constant application.
class Term {
 public:
  Term() = default;

  static Term variable(VarIndex index) {
    Term t;
    t.is_var_ = true;
    t.value_ = index;
    return t;
  }

  static Term app(SymbolId symbol, std::vector<Term> args = {}) {
    Term t;
    t.is_var_ = false;
    t.value_ = symbol;
    t.args_ = std::move(args);
    return t;
  }

  bool is_var() const noexcept { return is_var_; }
  VarIndex var() const noexcept { return value_; }
  SymbolId symbol() const noexcept { return value_; }
  const std::vector<Term>& args() const noexcept { return args_; }
  std::vector<Term>& args() noexcept { return args_; }

  /// Number of symbol and variable occurrences.
  std::size_t weight() const noexcept;
  bool contains_var(VarIndex index) const noexcept;
  bool ground() const noexcept;

  friend bool operator==(const Term&, const Term&) = default;
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  bool is_var_ = true;
  std::uint32_t value_ = 0;
  std::vector<Term> args_;
};

struct Literal {
  bool negated = false;
  SymbolId predicate = 0;
  std::vector<Term> args;

  std::size_t weight() const noexcept;
  bool same_atom(const Literal& other) const noexcept {
    return predicate == other.predicate && args == other.args;
  }
  Literal complement() const { return Literal{!negated, predicate, args}; }

  friend bool operator==(const Literal&, const Literal&) = default;
};

enum class ClauseRole : std::uint8_t { Axiom, NegatedConjecture, Derived };

const char* to_string(ClauseRole role);

struct Clause {
  std::vector<Literal> literals;
  ClauseRole role = ClauseRole::Axiom;
  ClauseId id = 0;
  std::vector<ClauseId> parents;
  std::string name;  // source statement name, empty for derived clauses

  bool is_empty() const noexcept { return literals.empty(); }
  std::size_t weight() const noexcept;
  /// One past the largest variable index, 0 for ground clauses.
  VarIndex var_bound() const noexcept;
};

struct Problem {
  std::string name;
  std::vector<Clause> clauses;
  SymbolTable symbols;
};

/// Renumbers variables densely in first-occurrence order (literal order, depth first).
void canonicalize(Clause& clause);
bool is_canonical(const Clause& clause);

/// Parses `cnf(name, role, formula).` statements. Throws ParseError / ArityConflict.
Problem parse_problem(std::string_view text, std::string problem_name = {});
Problem parse_problem_file(const std::filesystem::path& path);

std::string render_term(const Term& term, const SymbolTable& table);
std::string render_literal(const Literal& literal, const SymbolTable& table);
/// The disjunction alone, `$false` for the empty clause.
std::string render_formula(const Clause& clause, const SymbolTable& table);
/// A complete `cnf(...)` statement.
std::string render_clause(const Clause& clause, const SymbolTable& table);

}  // namespace saturn
