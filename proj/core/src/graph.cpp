#include "saturn/graph.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace saturn {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Conj: return "CONJ";
    case NodeKind::Clause: return "CLAUSE";
    case NodeKind::Neg: return "NEG";
    case NodeKind::PredApp: return "PRED_APP";
    case NodeKind::FuncApp: return "FUNC_APP";
    case NodeKind::NamePred: return "NAME_PRED";
    case NodeKind::NameFunc: return "NAME_FUNC";
    case NodeKind::NameConst: return "NAME_CONST";
    case NodeKind::Var: return "VAR";
  }
  return "?";
}

namespace {

using AtomKey = std::pair<SymbolId, std::vector<Term>>;

// Emits one clause subgraph into `graph`. Name nodes go through `names`, which is
// clause-local for clause graphs and shared for theory graphs; everything else is
// hash-consed per clause only.
class ClauseEmitter {
 public:
  ClauseEmitter(Graph& graph, std::map<SymbolId, NodeId>& names) : graph_(graph), names_(names) {}

  NodeId emit(const Clause& clause) {
    const NodeId root = add_node(NodeKind::Clause);
    for (const auto& lit : clause.literals) {
      if (lit.negated) {
        // The atom id is needed for the NEG key, but the NEG node must precede the atom
        // in pre-order. Look up first; create the NEG before the atom when both are new.
        const auto existing_atom = atoms_.find(AtomKey{lit.predicate, lit.args});
        if (existing_atom != atoms_.end()) {
          if (auto it = negs_.find(existing_atom->second); it != negs_.end()) {
            add_edge(root, it->second, EdgeLabel::Literal);
            continue;
          }
        }
        const NodeId neg = add_node(NodeKind::Neg);
        add_edge(root, neg, EdgeLabel::Literal);
        const NodeId atom = emit_atom(lit);
        negs_.emplace(atom, neg);
        add_edge(neg, atom, EdgeLabel::Literal);
      } else {
        add_edge(root, emit_atom(lit), EdgeLabel::Literal);
      }
    }
    return root;
  }

  const std::vector<NodeId>& var_nodes() const { return vars_; }

 private:
  NodeId add_node(NodeKind kind, std::optional<SymbolId> symbol = std::nullopt) {
    const auto id = static_cast<NodeId>(graph_.nodes.size());
    graph_.nodes.push_back(GraphNode{id, kind, symbol});
    return id;
  }

  void add_edge(NodeId from, NodeId to, EdgeLabel label, std::uint32_t position = 0) {
    graph_.edges.push_back(Edge{from, to, label, position});
  }

  NodeId name_node(SymbolId symbol, NodeKind kind) {
    if (auto it = names_.find(symbol); it != names_.end()) return it->second;
    const NodeId id = add_node(kind, symbol);
    names_.emplace(symbol, id);
    return id;
  }

  NodeId emit_atom(const Literal& lit) {
    AtomKey key{lit.predicate, lit.args};
    if (auto it = atoms_.find(key); it != atoms_.end()) return it->second;
    const NodeId app = add_node(NodeKind::PredApp);
    atoms_.emplace(std::move(key), app);
    add_edge(app, name_node(lit.predicate, NodeKind::NamePred), EdgeLabel::Name);
    emit_args(app, lit.args);
    return app;
  }

  void emit_args(NodeId parent, const std::vector<Term>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      add_edge(parent, emit_term(args[i]), EdgeLabel::Arg, static_cast<std::uint32_t>(i + 1));
    }
  }

  NodeId emit_term(const Term& t) {
    if (t.is_var()) {
      if (t.var() >= vars_.size()) vars_.resize(t.var() + 1, kUnset);
      if (vars_[t.var()] == kUnset) vars_[t.var()] = add_node(NodeKind::Var);
      return vars_[t.var()];
    }
    if (t.args().empty()) return name_node(t.symbol(), NodeKind::NameConst);
    if (auto it = terms_.find(t); it != terms_.end()) return it->second;
    const NodeId app = add_node(NodeKind::FuncApp);
    terms_.emplace(t, app);
    add_edge(app, name_node(t.symbol(), NodeKind::NameFunc), EdgeLabel::Name);
    emit_args(app, t.args());
    return app;
  }

  static constexpr NodeId kUnset = ~NodeId{0};

  Graph& graph_;
  std::map<SymbolId, NodeId>& names_;
  std::map<AtomKey, NodeId> atoms_;
  std::map<Term, NodeId> terms_;
  std::map<NodeId, NodeId> negs_;  // atom node -> NEG node
  std::vector<NodeId> vars_;
};

}  // namespace

ClauseGraph build_clause_graph(const Clause& clause) {
  ClauseGraph graph;
  std::map<SymbolId, NodeId> names;
  ClauseEmitter emitter(graph, names);
  graph.root = emitter.emit(clause);
  graph.var_nodes = emitter.var_nodes();
  return graph;
}

TheoryGraph build_theory_graph(const std::vector<Clause>& clauses) {
  TheoryGraph graph;
  graph.nodes.push_back(GraphNode{0, NodeKind::Conj, std::nullopt});
  graph.root = 0;
  for (const auto& clause : clauses) {
    ClauseEmitter emitter(graph, graph.name_index);
    const NodeId root = emitter.emit(clause);
    graph.edges.push_back(Edge{graph.root, root, EdgeLabel::Clause, 0});
    graph.clause_roots.push_back(root);
  }
  return graph;
}

TheoryGraph build_theory_graph(const Problem& problem) { return build_theory_graph(problem.clauses); }

GraphStats graph_stats(const Graph& graph) {
  GraphStats stats;
  const std::size_t n = graph.nodes.size();
  stats.nodes = n;
  stats.edges = graph.edges.size();

  std::vector<std::size_t> in_degree(n, 0);
  for (const auto& e : graph.edges) ++in_degree[e.to];
  if (n) stats.max_in_degree = *std::max_element(in_degree.begin(), in_degree.end());

  // Occurrence counts = number of root paths along non-name edges (Kahn order).
  std::vector<std::vector<NodeId>> children(n);
  std::vector<std::size_t> pending(n, 0);
  for (const auto& e : graph.edges) {
    if (e.label == EdgeLabel::Name) continue;
    children[e.from].push_back(e.to);
    ++pending[e.to];
  }
  std::vector<std::size_t> paths(n, 0);
  std::vector<NodeId> ready;
  for (NodeId v = 0; v < n; ++v) {
    if (pending[v] == 0) {
      ready.push_back(v);
      paths[v] = 1;
    }
  }
  while (!ready.empty()) {
    const NodeId v = ready.back();
    ready.pop_back();
    for (NodeId c : children[v]) {
      paths[c] += paths[v];
      if (--pending[c] == 0) ready.push_back(c);
    }
  }

  std::size_t tree = 0;
  for (const auto& node : graph.nodes) {
    const bool shared_name = node.kind == NodeKind::NamePred || node.kind == NodeKind::NameFunc;
    tree += shared_name ? 1 : paths[node.id];
  }
  stats.shared_subterm_savings = tree >= n ? tree - n : 0;
  return stats;
}

std::vector<NodeId> cross_clause_shared_nodes(const TheoryGraph& graph) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<NodeId>> children(n);
  for (const auto& e : graph.edges) children[e.from].push_back(e.to);

  std::vector<std::size_t> owners(n, 0);
  std::vector<std::size_t> seen_in(n, ~std::size_t{0});
  for (std::size_t c = 0; c < graph.clause_roots.size(); ++c) {
    std::vector<NodeId> stack{graph.clause_roots[c]};
    seen_in[graph.clause_roots[c]] = c;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      ++owners[v];
      for (NodeId w : children[v]) {
        if (seen_in[w] != c) {
          seen_in[w] = c;
          stack.push_back(w);
        }
      }
    }
  }
  std::vector<NodeId> shared;
  for (NodeId v = 0; v < n; ++v) {
    if (owners[v] >= 2) shared.push_back(v);
  }
  return shared;
}

std::string to_dot(const Graph& graph, const SymbolTable* symbols) {
  std::ostringstream out;
  out << "digraph G {\n";
  for (const auto& node : graph.nodes) {
    out << "  n" << node.id << " [label=\"" << to_string(node.kind);
    if (node.symbol && symbols && *node.symbol < symbols->size()) out << "\\n" << symbols->name(*node.symbol);
    out << "\"";
    if (is_name_kind(node.kind)) out << ", shape=box";
    out << "];\n";
  }
  for (const auto& e : graph.edges) {
    out << "  n" << e.from << " -> n" << e.to;
    switch (e.label) {
      case EdgeLabel::Name: out << " [style=dashed]"; break;
      case EdgeLabel::Arg: out << " [label=\"" << e.position << "\"]"; break;
      case EdgeLabel::Literal:
      case EdgeLabel::Clause: break;
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace saturn
