#include "saturn/tptp.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "saturn/error.hpp"

namespace saturn {

const char* to_string(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::Predicate: return "predicate";
    case SymbolKind::Function: return "function";
    case SymbolKind::Constant: return "constant";
  }
  return "?";
}

const char* to_string(ClauseRole role) {
  switch (role) {
    case ClauseRole::Axiom: return "axiom";
    case ClauseRole::NegatedConjecture: return "negated_conjecture";
    case ClauseRole::Derived: return "plain";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// SymbolTable

std::optional<SymbolId> SymbolTable::try_intern(std::string_view name, SymbolKind kind,
                                                std::uint32_t arity) {
  std::string key(name);
  if (auto it = by_name_.find(key); it != by_name_.end()) {
    const Symbol& existing = symbols_[it->second];
    if (existing.kind != kind || existing.arity != arity) return std::nullopt;
    return existing.id;
  }
  const auto id = static_cast<SymbolId>(symbols_.size());
  symbols_.push_back(Symbol{id, kind, arity, key});
  by_name_.emplace(std::move(key), id);
  return id;
}

SymbolId SymbolTable::intern(std::string_view name, SymbolKind kind, std::uint32_t arity) {
  if (auto id = try_intern(name, kind, arity)) return *id;
  throw Error("symbol '" + std::string(name) + "' redeclared with a different kind or arity");
}

std::optional<SymbolId> SymbolTable::find(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Term / Literal / Clause

std::size_t Term::weight() const noexcept {
  std::size_t w = 1;
  for (const auto& a : args_) w += a.weight();
  return w;
}

bool Term::contains_var(VarIndex index) const noexcept {
  if (is_var_) return value_ == index;
  return std::any_of(args_.begin(), args_.end(),
                     [index](const Term& a) { return a.contains_var(index); });
}

bool Term::ground() const noexcept {
  if (is_var_) return false;
  return std::all_of(args_.begin(), args_.end(), [](const Term& a) { return a.ground(); });
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  // Variables sort before applications.
  if (a.is_var_ != b.is_var_) return a.is_var_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (auto c = a.value_ <=> b.value_; c != 0) return c;
  if (auto c = a.args_.size() <=> b.args_.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.args_.size(); ++i) {
    if (auto c = a.args_[i] <=> b.args_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t Literal::weight() const noexcept {
  std::size_t w = 1;
  for (const auto& a : args) w += a.weight();
  return w;
}

std::size_t Clause::weight() const noexcept {
  std::size_t w = 0;
  for (const auto& l : literals) w += l.weight();
  return w;
}

namespace {

VarIndex term_var_bound(const Term& t) {
  if (t.is_var()) return t.var() + 1;
  VarIndex bound = 0;
  for (const auto& a : t.args()) bound = std::max(bound, term_var_bound(a));
  return bound;
}

void renumber(Term& t, std::vector<std::int64_t>& mapping, VarIndex& next) {
  if (t.is_var()) {
    const VarIndex old = t.var();
    if (old >= mapping.size()) mapping.resize(old + 1, -1);
    if (mapping[old] < 0) mapping[old] = next++;
    t = Term::variable(static_cast<VarIndex>(mapping[old]));
    return;
  }
  for (auto& a : t.args()) renumber(a, mapping, next);
}

bool check_canonical(const Term& t, VarIndex& next) {
  if (t.is_var()) {
    if (t.var() > next) return false;
    if (t.var() == next) ++next;
    return true;
  }
  for (const auto& a : t.args()) {
    if (!check_canonical(a, next)) return false;
  }
  return true;
}

}  // namespace

VarIndex Clause::var_bound() const noexcept {
  VarIndex bound = 0;
  for (const auto& l : literals) {
    for (const auto& a : l.args) bound = std::max(bound, term_var_bound(a));
  }
  return bound;
}

void canonicalize(Clause& clause) {
  std::vector<std::int64_t> mapping;
  VarIndex next = 0;
  for (auto& l : clause.literals) {
    for (auto& a : l.args) renumber(a, mapping, next);
  }
}

bool is_canonical(const Clause& clause) {
  VarIndex next = 0;
  for (const auto& l : clause.literals) {
    for (const auto& a : l.args) {
      if (!check_canonical(a, next)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  LowerWord,
  UpperWord,
  DollarWord,
  Integer,
  Quoted,
  LParen,
  RParen,
  Comma,
  Dot,
  Pipe,
  Tilde,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) return tok;

    const char c = text_[pos_];
    auto single = [&](Tok kind) {
      tok.kind = kind;
      tok.text = std::string(1, c);
      advance();
      return tok;
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      case '.': return single(Tok::Dot);
      case '|': return single(Tok::Pipe);
      case '~': return single(Tok::Tilde);
      default: break;
    }
    if (c == '\'') {
      advance();
      while (pos_ < text_.size() && text_[pos_] != '\'') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) advance();
        tok.text.push_back(text_[pos_]);
        advance();
      }
      if (pos_ >= text_.size()) throw ParseError(tok.line, tok.column, "unterminated quoted name");
      advance();
      tok.kind = Tok::Quoted;
      return tok;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '$' || c == '_') {
      const std::size_t start = pos_;
      advance();
      while (pos_ < text_.size() && is_word_char(text_[pos_])) advance();
      tok.text = std::string(text_.substr(start, pos_ - start));
      if (c == '$') {
        tok.kind = Tok::DollarWord;
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        tok.kind = Tok::UpperWord;
      } else {
        tok.kind = Tok::LowerWord;
      }
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
      tok.kind = Tok::Integer;
      tok.text = std::string(text_.substr(start, pos_ - start));
      return tok;
    }
    throw ParseError(tok.line, tok.column, std::string("unexpected character '") + c + "'");
  }

 private:
  static bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        const std::size_t line = line_, column = column_;
        advance();
        advance();
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= text_.size()) throw ParseError(line, column, "unterminated block comment");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, Problem& problem) : lexer_(text), problem_(problem) { shift(); }

  void parse() {
    while (current_.kind != Tok::End) statement();
  }

 private:
  void shift() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw ParseError(at.line, at.column, message);
  }

  Token expect(Tok kind, const char* what) {
    if (current_.kind == Tok::End) fail(current_, std::string("unterminated statement: expected ") + what);
    if (current_.kind != kind) fail(current_, std::string("expected ") + what + ", found '" + current_.text + "'");
    Token tok = current_;
    shift();
    return tok;
  }

  void statement() {
    const Token head = current_;
    if (head.kind != Tok::LowerWord) fail(head, "expected 'cnf'");
    if (head.text != "cnf") fail(head, "unsupported statement '" + head.text + "' (only cnf is accepted)");
    shift();
    expect(Tok::LParen, "'('");

    Clause clause;
    if (current_.kind == Tok::LowerWord || current_.kind == Tok::Integer || current_.kind == Tok::Quoted) {
      clause.name = current_.text;
      shift();
    } else {
      expect(Tok::LowerWord, "statement name");
    }
    expect(Tok::Comma, "','");
    const Token role = expect(Tok::LowerWord, "role");
    if (role.text == "axiom" || role.text == "hypothesis" || role.text == "plain") {
      clause.role = ClauseRole::Axiom;
    } else if (role.text == "negated_conjecture") {
      clause.role = ClauseRole::NegatedConjecture;
    } else {
      fail(role, "unsupported role '" + role.text + "'");
    }
    expect(Tok::Comma, "','");

    variables_.clear();
    if (current_.kind == Tok::LParen) {
      shift();
      disjunction(clause);
      expect(Tok::RParen, "')'");
    } else {
      disjunction(clause);
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Dot, "'.'");

    // Drop syntactic duplicates; variables are already numbered in first-occurrence order.
    std::vector<Literal> unique;
    for (auto& l : clause.literals) {
      if (std::find(unique.begin(), unique.end(), l) == unique.end()) unique.push_back(std::move(l));
    }
    clause.literals = std::move(unique);
    canonicalize(clause);
    clause.id = static_cast<ClauseId>(problem_.clauses.size());
    problem_.clauses.push_back(std::move(clause));
  }

  void disjunction(Clause& clause) {
    literal(clause);
    while (current_.kind == Tok::Pipe) {
      shift();
      literal(clause);
    }
  }

  void literal(Clause& clause) {
    bool negated = false;
    if (current_.kind == Tok::Tilde) {
      negated = true;
      shift();
    }
    if (current_.kind == Tok::DollarWord) {
      if (current_.text == "$false" && !negated) {
        shift();
        return;
      }
      fail(current_, "unsupported literal '" + current_.text + "'");
    }
    if (current_.kind == Tok::End) fail(current_, "unterminated statement: expected literal");
    const Token name = current_;
    if (name.kind != Tok::LowerWord && name.kind != Tok::Quoted) {
      fail(name, "expected predicate symbol, found '" + name.text + "'");
    }
    shift();
    Literal lit;
    lit.negated = negated;
    lit.args = arguments();
    lit.predicate = intern(name, SymbolKind::Predicate, lit.args.size());
    clause.literals.push_back(std::move(lit));
  }

  std::vector<Term> arguments() {
    std::vector<Term> args;
    if (current_.kind != Tok::LParen) return args;
    shift();
    args.push_back(term());
    while (current_.kind == Tok::Comma) {
      shift();
      args.push_back(term());
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  Term term() {
    const Token tok = current_;
    if (tok.kind == Tok::End) fail(tok, "unterminated statement: expected term");
    if (tok.kind == Tok::UpperWord) {
      shift();
      auto [it, inserted] = variables_.try_emplace(tok.text, static_cast<VarIndex>(variables_.size()));
      return Term::variable(it->second);
    }
    if (tok.kind != Tok::LowerWord && tok.kind != Tok::Quoted && tok.kind != Tok::Integer) {
      fail(tok, "expected term, found '" + tok.text + "'");
    }
    shift();
    auto args = arguments();
    const auto kind = args.empty() ? SymbolKind::Constant : SymbolKind::Function;
    const SymbolId id = intern(tok, kind, args.size());
    return Term::app(id, std::move(args));
  }

  SymbolId intern(const Token& at, SymbolKind kind, std::size_t arity) {
    if (auto id = problem_.symbols.try_intern(at.text, kind, static_cast<std::uint32_t>(arity))) return *id;
    const Symbol& prior = problem_.symbols.at(*problem_.symbols.find(at.text));
    throw ArityConflict(at.line, at.column,
                        "symbol '" + at.text + "' used as " + to_string(kind) + "/" + std::to_string(arity) +
                            " but previously as " + to_string(prior.kind) + "/" + std::to_string(prior.arity));
  }

  Lexer lexer_;
  Problem& problem_;
  Token current_;
  std::unordered_map<std::string, VarIndex> variables_;
};

bool needs_quotes(const std::string& name) {
  if (name.empty() || !std::islower(static_cast<unsigned char>(name[0]))) return true;
  return !std::all_of(name.begin(), name.end(),
                      [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string render_name(const std::string& name) {
  if (!needs_quotes(name)) return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

void render_args(std::ostringstream& out, const std::vector<Term>& args, const SymbolTable& table) {
  if (args.empty()) return;
  out << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out << ',';
    out << render_term(args[i], table);
  }
  out << ')';
}

}  // namespace

Problem parse_problem(std::string_view text, std::string problem_name) {
  Problem problem;
  problem.name = std::move(problem_name);
  Parser(text, problem).parse();
  return problem;
}

Problem parse_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str(), path.stem().string());
}

std::string render_term(const Term& term, const SymbolTable& table) {
  if (term.is_var()) return "X" + std::to_string(term.var());
  std::ostringstream out;
  out << render_name(table.name(term.symbol()));
  render_args(out, term.args(), table);
  return out.str();
}

std::string render_literal(const Literal& literal, const SymbolTable& table) {
  std::ostringstream out;
  if (literal.negated) out << '~';
  out << render_name(table.name(literal.predicate));
  render_args(out, literal.args, table);
  return out.str();
}

std::string render_formula(const Clause& clause, const SymbolTable& table) {
  if (clause.is_empty()) return "$false";
  std::string out;
  for (std::size_t i = 0; i < clause.literals.size(); ++i) {
    if (i) out += " | ";
    out += render_literal(clause.literals[i], table);
  }
  return out;
}

std::string render_clause(const Clause& clause, const SymbolTable& table) {
  const std::string name = clause.name.empty() ? "c" + std::to_string(clause.id) : clause.name;
  return "cnf(" + render_name(name) + ", " + to_string(clause.role) + ", " + render_formula(clause, table) + ").";
}

}  // namespace saturn
