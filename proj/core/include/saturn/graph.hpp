#pragma once

// Name-invariant graph encodings of clauses and whole theories.
//
// A clause becomes a DAG rooted at a CLAUSE node. Variables collapse to one VAR token
// per distinct variable, identical subterms within the clause share a node, and every
// application points through a name edge to a NAME_* node for its symbol. Nodes never
// carry display names; only NAME_* nodes reference a symbol id at all.
//
// A theory graph puts all clauses under one CONJ root. NAME_* nodes are global (one
// per symbol) and are the only nodes shared between clause subgraphs.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saturn/tptp.hpp"

namespace saturn {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t {
  Conj,
  Clause,
  Neg,
  PredApp,
  FuncApp,
  NamePred,
  NameFunc,
  NameConst,
  Var,
};
inline constexpr std::size_t kNodeKindCount = 9;

const char* to_string(NodeKind kind);
constexpr bool is_name_kind(NodeKind k) {
  return k == NodeKind::NamePred || k == NodeKind::NameFunc || k == NodeKind::NameConst;
}

struct GraphNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Clause;
  std::optional<SymbolId> symbol;  // present iff kind is NAME_*
};

enum class EdgeLabel : std::uint8_t { Name, Arg, Literal, Clause };

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  EdgeLabel label = EdgeLabel::Arg;
  std::uint32_t position = 0;  // 1-based for Arg edges, 0 otherwise

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Nodes and edges, with nodes stored at index == id. Edges run parent -> child.
struct Graph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  NodeId root = 0;

  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }
};

struct ClauseGraph : Graph {
  std::vector<NodeId> var_nodes;  // indexed by canonical variable index
};

struct TheoryGraph : Graph {
  std::map<SymbolId, NodeId> name_index;
  std::vector<NodeId> clause_roots;  // one per problem clause, in problem order
};

/// Builds the clause DAG. Node ids follow a pre-order walk of the literals, so they are a
/// pure function of the canonical clause and independent of symbol ids.
ClauseGraph build_clause_graph(const Clause& clause);

/// Builds the connected theory graph over every clause of the problem.
TheoryGraph build_theory_graph(const Problem& problem);
TheoryGraph build_theory_graph(const std::vector<Clause>& clauses);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t max_in_degree = 0;
  /// Node count of the unshared tree encoding minus the DAG node count. In the tree
  /// encoding every occurrence of an atom or term (variables and constants included) is
  /// its own node; NAME_PRED/NAME_FUNC nodes stay one per symbol.
  std::size_t shared_subterm_savings = 0;
};

GraphStats graph_stats(const Graph& graph);

/// Nodes whose parents lie in the subgraphs of two or more clauses.
std::vector<NodeId> cross_clause_shared_nodes(const TheoryGraph& graph);

/// Graphviz rendering; NAME_* nodes are annotated with their display name.
std::string to_dot(const Graph& graph, const SymbolTable* symbols = nullptr);

}  // namespace saturn
