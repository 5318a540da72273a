#include "saturn/logic.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace saturn {

// ---------------------------------------------------------------------------
// Substitution

const Term* Substitution::lookup(VarIndex var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& term) const {
  if (term.is_var()) {
    const Term* bound = lookup(term.var());
    return bound ? apply(*bound) : term;
  }
  std::vector<Term> args;
  args.reserve(term.args().size());
  for (const auto& a : term.args()) args.push_back(apply(a));
  return Term::app(term.symbol(), std::move(args));
}

Literal Substitution::apply(const Literal& literal) const {
  Literal out{literal.negated, literal.predicate, {}};
  out.args.reserve(literal.args.size());
  for (const auto& a : literal.args) out.args.push_back(apply(a));
  return out;
}

Substitution Substitution::resolved() const {
  Substitution out;
  for (const auto& [var, value] : bindings_) out.bindings_.emplace(var, apply(value));
  return out;
}

// ---------------------------------------------------------------------------
// Unification

namespace {

const Term& walk(const Term& t, const Substitution& subst) {
  const Term* cur = &t;
  while (cur->is_var()) {
    const Term* next = subst.lookup(cur->var());
    if (!next) break;
    cur = next;
  }
  return *cur;
}

bool occurs(VarIndex var, const Term& t, const Substitution& subst) {
  const Term& w = walk(t, subst);
  if (w.is_var()) return w.var() == var;
  for (const auto& a : w.args()) {
    if (occurs(var, a, subst)) return true;
  }
  return false;
}

}  // namespace

bool unify_into(const Term& a, const Term& b, Substitution& subst) {
  std::vector<std::pair<const Term*, const Term*>> work{{&a, &b}};
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    const Term& s = walk(*x, subst);
    const Term& t = walk(*y, subst);
    if (s.is_var() && t.is_var() && s.var() == t.var()) continue;
    if (s.is_var()) {
      if (occurs(s.var(), t, subst)) return false;
      subst.bind(s.var(), t);
      continue;
    }
    if (t.is_var()) {
      if (occurs(t.var(), s, subst)) return false;
      subst.bind(t.var(), s);
      continue;
    }
    if (s.symbol() != t.symbol() || s.args().size() != t.args().size()) return false;
    for (std::size_t i = s.args().size(); i-- > 0;) work.emplace_back(&s.args()[i], &t.args()[i]);
  }
  return true;
}

std::optional<Substitution> unify(const Term& a, const Term& b) {
  Substitution subst;
  if (!unify_into(a, b, subst)) return std::nullopt;
  return subst.resolved();
}

std::optional<Substitution> unify(const Literal& a, const Literal& b) {
  if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;
  Substitution subst;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!unify_into(a.args[i], b.args[i], subst)) return std::nullopt;
  }
  return subst.resolved();
}

// ---------------------------------------------------------------------------
// Literal selection

const char* to_string(LiteralSelection selection) {
  switch (selection) {
    case LiteralSelection::All: return "all";
    case LiteralSelection::NegativeOnly: return "negative_only";
    case LiteralSelection::MaxWeight: return "max_weight";
  }
  return "?";
}

std::optional<LiteralSelection> parse_literal_selection(const std::string& text) {
  if (text == "all") return LiteralSelection::All;
  if (text == "negative_only") return LiteralSelection::NegativeOnly;
  if (text == "max_weight") return LiteralSelection::MaxWeight;
  return std::nullopt;
}

std::vector<std::size_t> eligible_literals(const Clause& clause, LiteralSelection selection) {
  const std::size_t n = clause.literals.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (selection == LiteralSelection::All) return all;

  std::vector<std::size_t> negative;
  for (std::size_t i = 0; i < n; ++i) {
    if (clause.literals[i].negated) negative.push_back(i);
  }
  if (negative.empty()) return all;
  if (selection == LiteralSelection::NegativeOnly) return negative;

  std::size_t best = negative.front();
  std::size_t best_weight = clause.literals[best].weight();
  for (std::size_t i : negative) {
    const std::size_t w = clause.literals[i].weight();
    if (w > best_weight) {
      best = i;
      best_weight = w;
    }
  }
  return {best};
}

// ---------------------------------------------------------------------------
// Inference rules

namespace {

Term shift_vars(const Term& t, VarIndex offset) {
  if (t.is_var()) return Term::variable(t.var() + offset);
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(shift_vars(a, offset));
  return Term::app(t.symbol(), std::move(args));
}

Clause shifted(const Clause& c, VarIndex offset) {
  Clause out = c;
  if (offset == 0) return out;
  for (auto& l : out.literals) {
    for (auto& a : l.args) a = shift_vars(a, offset);
  }
  return out;
}

Clause finish_derived(std::vector<Literal> literals, std::vector<ClauseId> parents) {
  Clause out;
  out.literals = std::move(literals);
  out.role = ClauseRole::Derived;
  out.parents = std::move(parents);
  merge_duplicate_literals(out);
  canonicalize(out);
  return out;
}

}  // namespace

void merge_duplicate_literals(Clause& clause) {
  std::vector<Literal> unique;
  unique.reserve(clause.literals.size());
  for (auto& l : clause.literals) {
    if (std::find(unique.begin(), unique.end(), l) == unique.end()) unique.push_back(std::move(l));
  }
  clause.literals = std::move(unique);
}

std::pair<Clause, Clause> rename_apart(const Clause& first, const Clause& second) {
  return {first, shifted(second, first.var_bound())};
}

std::vector<Clause> resolvents(const Clause& given, const Clause& partner, LiteralSelection selection) {
  auto [left, right] = rename_apart(given, partner);
  const auto left_sel = eligible_literals(left, selection);
  const auto right_sel = eligible_literals(right, selection);

  std::vector<Clause> out;
  for (std::size_t i : left_sel) {
    const Literal& li = left.literals[i];
    for (std::size_t j : right_sel) {
      const Literal& lj = right.literals[j];
      if (li.negated == lj.negated || li.predicate != lj.predicate) continue;
      auto mgu = unify(li, lj);
      if (!mgu) continue;
      std::vector<Literal> lits;
      lits.reserve(left.literals.size() + right.literals.size() - 2);
      for (std::size_t k = 0; k < left.literals.size(); ++k) {
        if (k != i) lits.push_back(mgu->apply(left.literals[k]));
      }
      for (std::size_t k = 0; k < right.literals.size(); ++k) {
        if (k != j) lits.push_back(mgu->apply(right.literals[k]));
      }
      out.push_back(finish_derived(std::move(lits), {given.id, partner.id}));
    }
  }
  return out;
}

std::vector<Clause> factors(const Clause& clause) {
  std::vector<Clause> out;
  const auto& lits = clause.literals;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    for (std::size_t j = i + 1; j < lits.size(); ++j) {
      if (lits[i].negated != lits[j].negated || lits[i].predicate != lits[j].predicate) continue;
      auto mgu = unify(lits[i], lits[j]);
      if (!mgu) continue;
      std::vector<Literal> merged;
      merged.reserve(lits.size() - 1);
      for (std::size_t k = 0; k < lits.size(); ++k) {
        if (k != j) merged.push_back(mgu->apply(lits[k]));
      }
      out.push_back(finish_derived(std::move(merged), {clause.id}));
    }
  }
  return out;
}

bool is_tautology(const Clause& clause) {
  const auto& lits = clause.literals;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    for (std::size_t j = i + 1; j < lits.size(); ++j) {
      if (lits[i].negated != lits[j].negated && lits[i].same_atom(lits[j])) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Variant keys

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_term(std::string& out, const Term& t, bool with_vars) {
  if (t.is_var()) {
    out.push_back('V');
    if (with_vars) put_u32(out, t.var());
    return;
  }
  out.push_back('F');
  put_u32(out, t.symbol());
  put_u32(out, static_cast<std::uint32_t>(t.args().size()));
  for (const auto& a : t.args()) put_term(out, a, with_vars);
}

void put_literal(std::string& out, const Literal& l, bool with_vars) {
  out.push_back(l.negated ? '-' : '+');
  put_u32(out, l.predicate);
  put_u32(out, static_cast<std::uint32_t>(l.args.size()));
  for (const auto& a : l.args) put_term(out, a, with_vars);
}

void collect_vars(const Term& t, std::vector<VarIndex>& out) {
  if (t.is_var()) {
    out.push_back(t.var());
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

void collect_vars(const Literal& l, std::vector<VarIndex>& out) {
  for (const auto& a : l.args) collect_vars(a, out);
}

std::string serialize_ordered(const Clause& c, const std::vector<std::size_t>& order) {
  Clause tmp;
  tmp.literals.reserve(order.size());
  for (std::size_t i : order) tmp.literals.push_back(c.literals[i]);
  canonicalize(tmp);
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(tmp.literals.size()));
  for (const auto& l : tmp.literals) put_literal(out, l, true);
  return out;
}

void put_mapped(std::string& out, const Term& t, std::vector<std::int64_t>& map, VarIndex& next) {
  if (t.is_var()) {
    std::int64_t& m = map[t.var()];
    if (m < 0) m = next++;
    out.push_back('V');
    put_u32(out, static_cast<std::uint32_t>(m));
    return;
  }
  out.push_back('F');
  put_u32(out, t.symbol());
  put_u32(out, static_cast<std::uint32_t>(t.args().size()));
  for (const auto& a : t.args()) put_mapped(out, a, map, next);
}

struct KeySearch {
  const Clause& clause;
  const std::vector<std::size_t>& cls;
  const std::vector<std::vector<std::size_t>>& members;
  std::vector<char> used;
  std::size_t visited = 0;
  bool exhausted = false;
  std::string best;

  void descend(std::size_t pos, std::string& prefix, const std::vector<std::int64_t>& map, VarIndex next) {
    if (exhausted) return;
    if (pos == cls.size()) {
      if (best.empty() || prefix < best) best = prefix;
      return;
    }
    if (++visited > kVariantSearchBudget) {
      exhausted = true;
      return;
    }
    struct Option {
      std::size_t literal;
      std::string segment;
      std::vector<std::int64_t> map;
      VarIndex next;
      bool settled;
    };
    // variables still open in more than one unused literal
    std::vector<std::uint32_t> open_count(map.size(), 0);
    std::vector<VarIndex> vars;
    for (std::size_t i = 0; i < clause.literals.size(); ++i) {
      if (used[i]) continue;
      vars.clear();
      collect_vars(clause.literals[i], vars);
      std::sort(vars.begin(), vars.end());
      vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
      for (VarIndex v : vars) ++open_count[v];
    }
    std::vector<Option> options;
    bool have_settled = false;
    for (std::size_t i : members[cls[pos]]) {
      if (used[i]) continue;
      Option o{i, {}, map, next, true};
      vars.clear();
      collect_vars(clause.literals[i], vars);
      for (VarIndex v : vars) o.settled = o.settled && (map[v] >= 0 || open_count[v] == 1);
      const Literal& l = clause.literals[i];
      o.segment.push_back(l.negated ? '-' : '+');
      put_u32(o.segment, l.predicate);
      put_u32(o.segment, static_cast<std::uint32_t>(l.args.size()));
      for (const auto& a : l.args) put_mapped(o.segment, a, o.map, o.next);
      if (!options.empty() && o.segment > options.front().segment) continue;
      if (!options.empty() && o.segment < options.front().segment) {
        options.clear();
        have_settled = false;
      }
      // a literal touching nothing still open leaves the same remainder as any other
      // such literal with this segment
      if (o.settled && have_settled) continue;
      have_settled = have_settled || o.settled;
      options.push_back(std::move(o));
    }
    const std::size_t mark = prefix.size();
    for (auto& o : options) {
      used[o.literal] = 1;
      prefix += o.segment;
      descend(pos + 1, prefix, o.map, o.next);
      prefix.resize(mark);
      used[o.literal] = 0;
    }
  }
};

// Key of a clause whose literals are all linked through shared variables.
std::string component_key(const Clause& clause) {
  const std::size_t n = clause.literals.size();
  struct Entry {
    std::size_t index;
    SymbolId predicate;
    bool negated;
    std::string skeleton;
  };
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Literal& l = clause.literals[i];
    std::string skeleton;
    put_literal(skeleton, l, false);
    entries.push_back({i, l.predicate, l.negated, std::move(skeleton)});
  }
  auto sort_key = [](const Entry& e) { return std::tie(e.predicate, e.negated, e.skeleton); };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const Entry& a, const Entry& b) { return sort_key(a) < sort_key(b); });

  // Split skeleton ties by how variables are shared between literals. Every step only
  // looks at renaming-invariant data, so variants end up with the same classes.
  std::vector<std::size_t> cls(n, 0);
  for (std::size_t i = 1; i < n; ++i) cls[i] = cls[i - 1] + (sort_key(entries[i]) == sort_key(entries[i - 1]) ? 0 : 1);
  std::vector<std::vector<VarIndex>> occurrences(n);
  for (std::size_t i = 0; i < n; ++i) collect_vars(clause.literals[entries[i].index], occurrences[i]);
  for (std::size_t distinct = n ? cls.back() + 1 : 0; distinct < n;) {
    std::map<VarIndex, std::vector<std::pair<std::size_t, std::size_t>>> signature;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < occurrences[i].size(); ++k) signature[occurrences[i][k]].emplace_back(cls[i], k);
    }
    std::map<std::vector<std::pair<std::size_t, std::size_t>>, std::size_t> sig_rank;
    for (auto& [v, sig] : signature) {
      std::sort(sig.begin(), sig.end());
      sig_rank.emplace(sig, 0);
    }
    std::size_t r = 0;
    for (auto& [sig, rank] : sig_rank) rank = r++;
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i].first = cls[i];
      for (VarIndex v : occurrences[i]) keys[i].second.push_back(sig_rank.at(signature.at(v)));
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<Entry> sorted_entries;
    std::vector<std::vector<VarIndex>> sorted_occ;
    std::vector<std::size_t> next(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sorted_entries.push_back(std::move(entries[perm[i]]));
      sorted_occ.push_back(std::move(occurrences[perm[i]]));
      if (i > 0) next[i] = next[i - 1] + (keys[perm[i]] == keys[perm[i - 1]] ? 0 : 1);
    }
    entries = std::move(sorted_entries);
    occurrences = std::move(sorted_occ);
    const std::size_t refined = next.back() + 1;
    cls = std::move(next);
    if (refined == distinct) break;
    distinct = refined;
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = entries[i].index;
  if (n == 0 || cls.back() + 1 == n) return serialize_ordered(clause, order);

  // Depth-first over the remaining ties, branching only on literals whose serialization
  // is smallest at each position. Literal segments are prefix free, so the smallest
  // full key lies on one of these branches. The tree only depends on the clause up to
  // renaming, so the node budget cuts off variants consistently.
  std::vector<std::vector<std::size_t>> members(cls.back() + 1);
  for (std::size_t i = 0; i < n; ++i) members[cls[i]].push_back(entries[i].index);
  KeySearch search{clause, cls, members, std::vector<char>(n, 0), 0, false, {}};
  std::string prefix;
  put_u32(prefix, static_cast<std::uint32_t>(n));
  search.descend(0, prefix, std::vector<std::int64_t>(clause.var_bound(), -1), 0);
  return search.exhausted ? serialize_ordered(clause, order) : search.best;
}

}  // namespace

std::string variant_key(const Clause& clause) {
  // Literals that share no variables never constrain each other's renaming, so the
  // sorted keys of the connected pieces identify the clause.
  const std::size_t n = clause.literals.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::map<VarIndex, std::size_t> owner;
  std::vector<VarIndex> vars;
  for (std::size_t i = 0; i < n; ++i) {
    vars.clear();
    collect_vars(clause.literals[i], vars);
    for (VarIndex v : vars) {
      auto [it, fresh] = owner.emplace(v, i);
      if (!fresh) parent[root(i)] = root(it->second);
    }
  }
  std::map<std::size_t, Clause> pieces;
  for (std::size_t i = 0; i < n; ++i) pieces[root(i)].literals.push_back(clause.literals[i]);
  if (pieces.size() <= 1) return component_key(clause);

  std::vector<std::string> keys;
  keys.reserve(pieces.size());
  for (auto& [r, piece] : pieces) {
    canonicalize(piece);
    keys.push_back(component_key(piece));
  }
  std::sort(keys.begin(), keys.end());
  std::string out = "C";
  put_u32(out, static_cast<std::uint32_t>(n));
  for (const auto& k : keys) out += k;
  return out;
}

bool variant_equal(const Clause& a, const Clause& b) {
  return a.literals.size() == b.literals.size() && variant_key(a) == variant_key(b);
}

}  // namespace saturn
