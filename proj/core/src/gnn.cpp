#include "saturn/gnn.hpp"

#include <algorithm>
#include <cmath>

#include "saturn/error.hpp"
#include "saturn/rng.hpp"

namespace saturn {

// ---------------------------------------------------------------------------
// ModelParams

std::vector<ModelParams::Block> ModelParams::blocks() {
  std::vector<Block> out{{"type_table", &type_table}, {"pos_table", &pos_table}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    out.push_back({prefix + "w_self", &layers[l].w_self});
    out.push_back({prefix + "w_in", &layers[l].w_in});
    out.push_back({prefix + "w_out", &layers[l].w_out});
    out.push_back({prefix + "bias", &layers[l].bias});
  }
  out.push_back({"policy.w_a", &policy});
  return out;
}

std::vector<ModelParams::ConstBlock> ModelParams::blocks() const {
  std::vector<ConstBlock> out;
  for (auto& b : const_cast<ModelParams*>(this)->blocks()) out.push_back({b.name, b.tensor});
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& b : z.blocks()) b.tensor->fill(0.0);
  return z;
}

void ModelParams::add_scaled(double alpha, const ModelParams& other) {
  auto mine = blocks();
  auto theirs = other.blocks();
  for (std::size_t i = 0; i < mine.size(); ++i) axpy(alpha, theirs[i].tensor->data, mine[i].tensor->data);
}

double ModelParams::squared_norm() const {
  double s = 0.0;
  for (const auto& b : blocks()) s += dot(b.tensor->data, b.tensor->data);
  return s;
}

bool ModelParams::finite() const {
  for (const auto& b : blocks()) {
    if (!all_finite(b.tensor->data)) return false;
  }
  return true;
}

ModelParams init_params(std::size_t dim, std::uint64_t seed, std::size_t layers, std::size_t max_position) {
  if (dim == 0) throw ConfigError("embedding dimension must be at least 1");
  if (layers == 0) throw ConfigError("layer count must be at least 1");
  if (max_position == 0) throw ConfigError("position table must have at least one row");

  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  auto table = [&](std::size_t rows) {
    Tensor t(rows, dim);
    for (auto& x : t.data) x = rng.uniform(-1.0, 1.0);
    return t;
  };
  auto matrix = [&] {
    Tensor t(dim, dim);
    for (auto& x : t.data) x = rng.uniform(-1.0, 1.0) * scale;
    return t;
  };

  ModelParams p;
  p.dim = dim;
  p.max_position = max_position;
  p.seed = seed;
  p.type_table = table(kNodeKindCount);
  p.pos_table = table(max_position);
  for (std::size_t l = 0; l < layers; ++l) {
    LayerParams layer;
    layer.w_self = matrix();
    layer.w_in = matrix();
    layer.w_out = matrix();
    // nonzero so a dead row never sits exactly on the ReLU kink
    layer.bias = Tensor(1, dim);
    for (auto& x : layer.bias.data) x = rng.uniform(-1.0, 1.0) * scale;
    p.layers.push_back(std::move(layer));
  }
  p.policy = matrix();
  return p;
}

// ---------------------------------------------------------------------------
// Forward / backward

NodeEmbeddings initial_embeddings(const Graph& graph, const ModelParams& params, const SymbolEmbeddings* sym) {
  NodeEmbeddings init(graph.nodes.size(), params.dim);
  for (const auto& node : graph.nodes) {
    auto row = init.row(node.id);
    const auto kind_row = params.type_table.row(static_cast<std::size_t>(node.kind));
    if (sym && node.symbol) {
      if (auto it = sym->find(*node.symbol); it != sym->end() && it->second.size() == params.dim) {
        std::copy(it->second.begin(), it->second.end(), row.begin());
        continue;
      }
    }
    std::copy(kind_row.begin(), kind_row.end(), row.begin());
  }
  return init;
}

Adjacency Adjacency::build(const Graph& graph, std::size_t max_position) {
  Adjacency adj;
  adj.in.resize(graph.nodes.size());
  adj.out.resize(graph.nodes.size());
  for (const auto& e : graph.edges) {
    std::int32_t pos = -1;
    if (e.label == EdgeLabel::Arg) {
      const std::size_t clamped = std::min<std::size_t>(std::max<std::uint32_t>(e.position, 1), max_position);
      pos = static_cast<std::int32_t>(clamped - 1);
    }
    adj.in[e.to].push_back({e.from, pos});
    adj.out[e.from].push_back({e.to, pos});
  }
  auto by_node = [](const Link& a, const Link& b) {
    return a.node != b.node ? a.node < b.node : a.position < b.position;
  };
  for (auto& l : adj.in) std::sort(l.begin(), l.end(), by_node);
  for (auto& l : adj.out) std::sort(l.begin(), l.end(), by_node);
  return adj;
}

namespace {

void mean_messages(const std::vector<Adjacency::Link>& links, const Tensor& h, const Tensor& pos,
                   std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (links.empty()) return;
  for (const auto& link : links) {
    axpy(1.0, h.row(link.node), out);
    if (link.position >= 0) axpy(1.0, pos.row(static_cast<std::size_t>(link.position)), out);
  }
  const double inv = 1.0 / static_cast<double>(links.size());
  for (auto& x : out) x *= inv;
}

Tensor dropout_scale(std::size_t rows, std::size_t cols, const DropoutSpec& dropout, std::size_t layer) {
  Tensor scale(rows, cols);
  Rng rng(mix_seed(dropout.seed, layer));
  const double keep = 1.0 / (1.0 - dropout.rate);
  for (auto& x : scale.data) x = rng.uniform01() >= dropout.rate ? keep : 0.0;
  return scale;
}

thread_local ActivationTrace* active_trace = nullptr;

}  // namespace

void set_activation_trace(ActivationTrace* trace) { active_trace = trace; }

NodeEmbeddings forward(const Graph& graph, const ModelParams& params, const NodeEmbeddings& init,
                       ForwardCache* cache, const DropoutSpec& dropout) {
  const std::size_t n = graph.nodes.size();
  const std::size_t d = params.dim;
  if (dropout.active() && dropout.rate >= 1.0) throw ConfigError("dropout rate must be below 1");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  c.adjacency = Adjacency::build(graph, params.max_position);

  Tensor h = init;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& layer = params.layers[l];
    Tensor min(n, d), mout(n, d), pre(n, d), next(n, d);
    for (std::size_t v = 0; v < n; ++v) {
      mean_messages(c.adjacency.in[v], h, params.pos_table, min.row(v));
      mean_messages(c.adjacency.out[v], h, params.pos_table, mout.row(v));
      auto z = pre.row(v);
      std::copy(layer.bias.data.begin(), layer.bias.data.end(), z.begin());
      gemv_acc(layer.w_self, h.row(v), z);
      gemv_acc(layer.w_in, min.row(v), z);
      gemv_acc(layer.w_out, mout.row(v), z);
      auto o = next.row(v);
      for (std::size_t k = 0; k < d; ++k) o[k] = z[k] > 0.0 ? z[k] : 0.0;
      if (active_trace) {
        for (std::size_t k = 0; k < d; ++k) active_trace->positive.push_back(z[k] > 0.0);
      }
    }
    if (dropout.active()) {
      Tensor scale = dropout_scale(n, d, dropout, l);
      for (std::size_t i = 0; i < next.data.size(); ++i) next.data[i] *= scale.data[i];
      if (cache) c.keep_scale.push_back(std::move(scale));
    }
    if (cache) {
      c.inputs.push_back(std::move(h));
      c.msg_in.push_back(std::move(min));
      c.msg_out.push_back(std::move(mout));
      c.pre.push_back(std::move(pre));
    }
    h = std::move(next);
  }
  if (!all_finite(h.data)) throw Error("non-finite activation in message passing");
  if (cache) c.output = h;
  return h;
}

Tensor backward(const ModelParams& params, const ForwardCache& cache, const Tensor& upstream, ModelParams& grads) {
  const std::size_t d = params.dim;
  const std::size_t n = upstream.rows;
  Tensor g = upstream;

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const LayerParams& layer = params.layers[l];
    LayerParams& glayer = grads.layers[l];
    const Tensor& h = cache.inputs[l];
    const Tensor& pre = cache.pre[l];
    const bool dropped = !cache.keep_scale.empty();

    Tensor gz(n, d);
    for (std::size_t i = 0; i < gz.data.size(); ++i) {
      double x = g.data[i];
      if (dropped) x *= cache.keep_scale[l].data[i];
      gz.data[i] = pre.data[i] > 0.0 ? x : 0.0;
    }

    Tensor gh(n, d);
    Vector gmsg(d);
    for (std::size_t v = 0; v < n; ++v) {
      const auto gv = gz.row(v);
      if (std::all_of(gv.begin(), gv.end(), [](double x) { return x == 0.0; })) continue;
      outer_acc(gv, h.row(v), glayer.w_self);
      outer_acc(gv, cache.msg_in[l].row(v), glayer.w_in);
      outer_acc(gv, cache.msg_out[l].row(v), glayer.w_out);
      axpy(1.0, gv, glayer.bias.data);
      gemv_t_acc(layer.w_self, gv, gh.row(v));

      auto spread = [&](const Tensor& w, const std::vector<Adjacency::Link>& links) {
        if (links.empty()) return;
        std::fill(gmsg.begin(), gmsg.end(), 0.0);
        gemv_t_acc(w, gv, gmsg);
        const double inv = 1.0 / static_cast<double>(links.size());
        for (const auto& link : links) {
          axpy(inv, gmsg, gh.row(link.node));
          if (link.position >= 0) axpy(inv, gmsg, grads.pos_table.row(static_cast<std::size_t>(link.position)));
        }
      };
      spread(layer.w_in, cache.adjacency.in[v]);
      spread(layer.w_out, cache.adjacency.out[v]);
    }
    g = std::move(gh);
  }
  return g;
}

void accumulate_initial_grad(const Graph& graph, const Tensor& init_grad, const SymbolEmbeddings* sym,
                             ModelParams& grads, SymbolEmbeddings* sym_grads) {
  for (const auto& node : graph.nodes) {
    const auto row = init_grad.row(node.id);
    if (sym && node.symbol && sym->count(*node.symbol)) {
      if (sym_grads) {
        auto& acc = (*sym_grads)[*node.symbol];
        if (acc.empty()) acc.assign(row.size(), 0.0);
        axpy(1.0, row, acc);
      }
      continue;
    }
    axpy(1.0, row, grads.type_table.row(static_cast<std::size_t>(node.kind)));
  }
}

SymbolEmbeddings symbol_embeddings(const TheoryGraph& graph, const ModelParams& params, const DropoutSpec& dropout) {
  SymbolEmbeddings out;
  if (graph.name_index.empty()) return out;
  const Tensor init = initial_embeddings(graph, params, nullptr);
  const Tensor h = forward(graph, params, init, nullptr, dropout);
  for (const auto& [symbol, node] : graph.name_index) {
    const auto row = h.row(node);
    out.emplace(symbol, Vector(row.begin(), row.end()));
  }
  return out;
}

Vector readout(const Graph& graph, const Tensor& h) {
  Vector out(h.cols, 0.0);
  const std::size_t n = graph.node_count();
  if (n == 0) return out;
  for (std::size_t v = 0; v < n; ++v) axpy(1.0, h.row(v), out);
  const double inv = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= inv;
  return out;
}

void readout_backward(const Graph& graph, const Vector& grad, Tensor& upstream) {
  const std::size_t n = graph.node_count();
  if (n == 0) return;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t v = 0; v < n; ++v) axpy(inv, grad, upstream.row(v));
}

Vector clause_embedding(const Clause& clause, const ModelParams& params, const SymbolEmbeddings& sym,
                        const DropoutSpec& dropout) {
  const ClauseGraph graph = build_clause_graph(clause);
  const Tensor init = initial_embeddings(graph, params, &sym);
  const Tensor h = forward(graph, params, init, nullptr, dropout);
  return readout(graph, h);
}

// ---------------------------------------------------------------------------
// EmbeddingCache

Vector EmbeddingCache::get_or_compute(const std::string& key, const std::function<Vector()>& compute) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  Vector value = compute();
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(key, std::move(value));
  if (!inserted) ++hits_;
  return it->second;
}

std::optional<Vector> EmbeddingCache::find(const std::string& key) const {
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t EmbeddingCache::hits() const { return hits_.load(); }

}  // namespace saturn
