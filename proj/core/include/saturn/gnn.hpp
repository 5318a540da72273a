#pragma once

// Message-passing network over clause and theory graphs.
//
// Each layer updates every node v as
//
//   h'_v = ReLU(W_self h_v + W_in  mean_{u->v} (h_u + pos(u->v))
//                          + W_out mean_{v->u} (h_u + pos(v->u)) + b)
//
// where pos(e) is the learned position vector of an argument edge and zero for every
// other edge label, and the mean over no neighbours is the zero vector. Neighbours are
// summed in ascending node-id order so results are reproducible bit for bit.
//
// Embeddings are computed in two phases. Phase 1 runs the network once over the
// theory graph, seeding every node from the per-kind type table, and reads off the
// final vectors of the NAME_* nodes. Phase 2 embeds each clause graph on its own,
// seeding NAME_* nodes with those symbol vectors instead of the shared type vector.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "saturn/graph.hpp"
#include "saturn/tensor.hpp"

namespace saturn {

struct LayerParams {
  Tensor w_self;
  Tensor w_in;
  Tensor w_out;
  Tensor bias;  // 1 x d

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// All trainable state. The policy matrix lives here too so one checkpoint holds a
/// whole branch model.
struct ModelParams {
  std::size_t dim = 0;
  std::size_t max_position = 8;
  std::uint64_t seed = 0;
  Tensor type_table;  // kNodeKindCount x d
  Tensor pos_table;   // max_position x d
  std::vector<LayerParams> layers;
  Tensor policy;  // d x d

  std::size_t layer_count() const noexcept { return layers.size(); }

  struct Block {
    std::string name;
    Tensor* tensor;
  };
  struct ConstBlock {
    std::string name;
    const Tensor* tensor;
  };
  /// Every tensor with a stable name, in checkpoint order.
  std::vector<Block> blocks();
  std::vector<ConstBlock> blocks() const;

  ModelParams zeros_like() const;
  /// this += alpha * other (shapes must match)
  void add_scaled(double alpha, const ModelParams& other);
  double squared_norm() const;
  bool finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline constexpr std::size_t kDefaultDim = 64;
inline constexpr std::size_t kDefaultLayers = 2;
inline constexpr std::size_t kDefaultMaxPosition = 8;

/// Deterministic initialization: tables uniform in [-1, 1], matrices uniform in
/// [-1, 1] / sqrt(d), biases zero. Throws ConfigError for dim == 0 or layers == 0.
ModelParams init_params(std::size_t dim, std::uint64_t seed, std::size_t layers = kDefaultLayers,
                        std::size_t max_position = kDefaultMaxPosition);

using SymbolEmbeddings = std::map<SymbolId, Vector>;
/// One row per node.
using NodeEmbeddings = Tensor;

/// Inverted dropout on layer outputs. Masks are a pure function of (seed, layer, node, dim).
struct DropoutSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;

  bool active() const noexcept { return rate > 0.0; }
};

/// Row v = type_table[kind(v)], except NAME_* rows take sym[symbol] when `sym` is given
/// and contains the symbol.
NodeEmbeddings initial_embeddings(const Graph& graph, const ModelParams& params,
                                  const SymbolEmbeddings* sym = nullptr);

/// Sorted neighbour lists for one graph.
struct Adjacency {
  struct Link {
    NodeId node;
    std::int32_t position;  // row in pos_table, -1 for non-argument edges
  };
  std::vector<std::vector<Link>> in;   // u -> v, indexed by v
  std::vector<std::vector<Link>> out;  // v -> u, indexed by v

  static Adjacency build(const Graph& graph, std::size_t max_position);
};

/// Activations kept for the backward pass.
struct ForwardCache {
  Adjacency adjacency;
  std::vector<Tensor> inputs;     // layer inputs, inputs[0] = initial embeddings
  std::vector<Tensor> msg_in;     // mean incoming messages per layer
  std::vector<Tensor> msg_out;    // mean outgoing messages per layer
  std::vector<Tensor> pre;        // pre-activation per layer
  std::vector<Tensor> keep_scale; // dropout multiplier per layer (empty when off)
  Tensor output;
};

/// Sign pattern of every pre-activation seen by `forward` on this thread while installed.
/// Used by the gradient checker to notice when a perturbation crosses a ReLU kink.
struct ActivationTrace {
  std::vector<bool> positive;
};
void set_activation_trace(ActivationTrace* trace);

NodeEmbeddings forward(const Graph& graph, const ModelParams& params, const NodeEmbeddings& init,
                       ForwardCache* cache = nullptr, const DropoutSpec& dropout = {});

/// Reverse pass of `forward` for the scalar loss sum(upstream .* output). Parameter
/// gradients are added into `grads`; the gradient with respect to the initial
/// embeddings is returned.
Tensor backward(const ModelParams& params, const ForwardCache& cache, const Tensor& upstream,
                ModelParams& grads);

/// Routes gradients on initial embeddings to the type table and, for NAME_* rows seeded
/// from `sym`, into `sym_grads`.
void accumulate_initial_grad(const Graph& graph, const Tensor& init_grad, const SymbolEmbeddings* sym,
                             ModelParams& grads, SymbolEmbeddings* sym_grads);

/// Phase 1: whole-theory pass; returns the final vector of every NAME_* node.
SymbolEmbeddings symbol_embeddings(const TheoryGraph& graph, const ModelParams& params,
                                   const DropoutSpec& dropout = {});

/// Mean of the final vectors over every node of the clause graph, summed in node-id order.
/// The root alone only sees two hops, which leaves names under NEG out of reach.
Vector readout(const Graph& graph, const Tensor& h);

/// Spreads the gradient of `readout` evenly over `upstream` rows.
void readout_backward(const Graph& graph, const Vector& grad, Tensor& upstream);

/// Phase 2: pooled vector of the clause's own graph seeded with `sym`.
Vector clause_embedding(const Clause& clause, const ModelParams& params, const SymbolEmbeddings& sym,
                        const DropoutSpec& dropout = {});

/// Concurrent insert-or-get cache keyed by variant key.
class EmbeddingCache {
 public:
  Vector get_or_compute(const std::string& key, const std::function<Vector()>& compute);
  std::optional<Vector> find(const std::string& key) const;
  std::size_t size() const;
  std::size_t hits() const;

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Vector> entries_;
  std::atomic<std::size_t> hits_{0};
};

}  // namespace saturn
