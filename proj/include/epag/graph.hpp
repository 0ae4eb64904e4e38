#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epag/error.hpp"
#include "epag/rng.hpp"

namespace epag {

struct Edge {
  int u;  // u < v after canonicalization
  int v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Node features, one row per node, equal widths.
using FeatureMatrix = std::vector<std::vector<double>>;

/// Immutable undirected graph. Construction canonicalizes the edge list
/// (u < v within an edge, lexicographic order across edges) and validates
/// every type invariant; augmentations build fresh graphs rather than
/// mutating.
class Graph {
 public:
  Graph(int num_nodes, std::vector<std::pair<int, int>> edge_pairs,
        std::optional<FeatureMatrix> features = std::nullopt,
        std::optional<int> label = std::nullopt)
      : num_nodes_(num_nodes), features_(std::move(features)), label_(label) {
    if (num_nodes < 0) raise(errc::invalid_parameters, "num_nodes must be nonnegative");
    edges_.reserve(edge_pairs.size());
    for (std::size_t i = 0; i < edge_pairs.size(); ++i) {
      auto [u, v] = edge_pairs[i];
      if (u == v)
        raise(errc::self_loop, "self-loop at edge " + std::to_string(i) + ": (" +
                                   std::to_string(u) + "," + std::to_string(v) + ")");
      if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
        raise(errc::index_out_of_range, "edge " + std::to_string(i) + " (" + std::to_string(u) +
                                            "," + std::to_string(v) + ") references a node >= " +
                                            std::to_string(num_nodes));
      if (u > v) std::swap(u, v);
      edges_.push_back(Edge{u, v});
    }
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t i = 1; i < edges_.size(); ++i) {
      if (edges_[i] == edges_[i - 1])
        raise(errc::duplicate_edge, "duplicate edge (" + std::to_string(edges_[i].u) + "," +
                                        std::to_string(edges_[i].v) + ") after canonicalization");
    }
    if (features_) {
      if (static_cast<int>(features_->size()) != num_nodes_)
        raise(errc::feature_shape_mismatch,
              "feature matrix has " + std::to_string(features_->size()) + " rows, expected " +
                  std::to_string(num_nodes_));
      const std::size_t width = features_->empty() ? 0 : (*features_)[0].size();
      for (std::size_t r = 0; r < features_->size(); ++r) {
        if ((*features_)[r].size() != width)
          raise(errc::feature_shape_mismatch,
                "feature row " + std::to_string(r) + " has width " +
                    std::to_string((*features_)[r].size()) + ", expected " + std::to_string(width));
      }
    }
  }

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::optional<FeatureMatrix>& features() const noexcept { return features_; }
  std::optional<int> label() const noexcept { return label_; }

  /// Index of canonical edge (min(u,v), max(u,v)), or -1 if absent.
  int edge_index(int u, int v) const {
    if (u > v) std::swap(u, v);
    const Edge key{u, v};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it != edges_.end() && *it == key) return static_cast<int>(it - edges_.begin());
    return -1;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int num_nodes_;
  std::vector<Edge> edges_;
  std::optional<FeatureMatrix> features_;
  std::optional<int> label_;
};

/// Canonicalizing constructor under its contract name.
inline Graph validate_graph(int num_nodes, std::vector<std::pair<int, int>> edges,
                            std::optional<FeatureMatrix> features = std::nullopt,
                            std::optional<int> label = std::nullopt) {
  return Graph(num_nodes, std::move(edges), std::move(features), label);
}

inline Graph with_label(const Graph& g, std::optional<int> label) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(g.edges().size());
  for (const Edge& e : g.edges()) pairs.emplace_back(e.u, e.v);
  return Graph(g.num_nodes(), std::move(pairs), g.features(), label);
}

namespace detail {

inline std::vector<std::vector<std::pair<int, int>>> adjacency(const Graph& g) {
  // adjacency[v] = (neighbor, edge id)
  std::vector<std::vector<std::pair<int, int>>> adj(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) {
    adj[g.edges()[e].u].emplace_back(g.edges()[e].v, e);
    adj[g.edges()[e].v].emplace_back(g.edges()[e].u, e);
  }
  return adj;
}

inline int component_count(const Graph& g) {
  auto adj = adjacency(g);
  std::vector<char> seen(g.num_nodes(), 0);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.num_nodes(); ++s) {
    if (seen[s]) continue;
    ++components;
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [w, e] : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return components;
}

// Edge subsets as bitsets over edge ids.
using EdgeBits = std::vector<std::uint64_t>;

inline void bits_flip(EdgeBits& a, const EdgeBits& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

// True iff the edge subset forms one simple cycle: every touched vertex has
// degree exactly 2 and the touched subgraph is connected.
inline bool is_single_cycle(const Graph& g, const EdgeBits& bits, std::vector<int>& degree,
                            std::vector<int>& touched) {
  touched.clear();
  int edge_count = 0;
  for (std::size_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    while (word) {
      const int e = static_cast<int>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(word)));
      word &= word - 1;
      ++edge_count;
      for (int x : {g.edges()[e].u, g.edges()[e].v}) {
        if (degree[x] == 0) touched.push_back(x);
        ++degree[x];
      }
    }
  }
  bool ok = edge_count == static_cast<int>(touched.size()) && edge_count >= 3;
  if (ok) {
    for (int x : touched) {
      if (degree[x] != 2) {
        ok = false;
        break;
      }
    }
  }
  if (ok) {
    // connectivity over touched vertices using only subset edges
    std::vector<int> stack{touched.front()};
    std::vector<char> seen(g.num_nodes(), 0);
    seen[touched.front()] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e = 0; e < g.num_edges(); ++e) {
        if (!(bits[e / 64] >> (e % 64) & 1)) continue;
        const Edge& ed = g.edges()[e];
        int other = -1;
        if (ed.u == v)
          other = ed.v;
        else if (ed.v == v)
          other = ed.u;
        if (other >= 0 && !seen[other]) {
          seen[other] = 1;
          ++reached;
          stack.push_back(other);
        }
      }
    }
    ok = reached == static_cast<int>(touched.size());
  }
  for (int x : touched) degree[x] = 0;
  return ok;
}

}  // namespace detail

inline constexpr int kCyclomaticGuard = 20;

/// Exact number of simple cycles (closed walks over >= 3 distinct vertices,
/// up to rotation and reflection). Every simple cycle is an element of the
/// cycle space, so the count is found by walking all 2^mu - 1 nonempty
/// combinations of a fundamental cycle basis (mu = |E| - |V| + #components)
/// in Gray-code order and testing each XOR for being a single cycle.
inline int count_simple_cycles(const Graph& g) {
  const int n = g.num_nodes();
  const int m = g.num_edges();
  const int mu = m - n + detail::component_count(g);
  if (mu > kCyclomaticGuard)
    raise(errc::too_many_cycles, "cyclomatic number " + std::to_string(mu) + " exceeds guard " +
                                     std::to_string(kCyclomaticGuard));
  if (mu <= 0) return 0;

  // spanning forest -> fundamental cycle per non-tree edge
  auto adj = detail::adjacency(g);
  std::vector<int> parent(n, -1), parent_edge(n, -1), depth(n, 0);
  std::vector<char> visited(n, 0), tree_edge(m, 0);
  for (int s = 0; s < n; ++s) {
    if (visited[s]) continue;
    visited[s] = 1;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [w, e] : adj[v]) {
        if (!visited[w]) {
          visited[w] = 1;
          parent[w] = v;
          parent_edge[w] = e;
          depth[w] = depth[v] + 1;
          tree_edge[e] = 1;
          stack.push_back(w);
        }
      }
    }
  }

  const std::size_t words = static_cast<std::size_t>((m + 63) / 64);
  auto set_bit = [&](detail::EdgeBits& bits, int e) { bits[e / 64] |= std::uint64_t{1} << (e % 64); };
  std::vector<detail::EdgeBits> fundamental;
  for (int e = 0; e < m; ++e) {
    if (tree_edge[e]) continue;
    detail::EdgeBits bits(words, 0);
    set_bit(bits, e);
    int a = g.edges()[e].u, b = g.edges()[e].v;
    while (a != b) {
      if (depth[a] < depth[b]) std::swap(a, b);
      set_bit(bits, parent_edge[a]);
      a = parent[a];
    }
    fundamental.push_back(std::move(bits));
  }

  detail::EdgeBits current(words, 0);
  std::vector<int> degree(n, 0), touched;
  int count = 0;
  const std::uint32_t total = std::uint32_t{1} << mu;
  for (std::uint32_t i = 1; i < total; ++i) {
    detail::bits_flip(current, fundamental[static_cast<std::size_t>(__builtin_ctz(i))]);
    if (detail::is_single_cycle(g, current, degree, touched)) ++count;
  }
  return count;
}

/// d_c: absolute difference in simple-cycle counts.
inline int cycle_distance(const Graph& g, const Graph& h) {
  return std::abs(count_simple_cycles(g) - count_simple_cycles(h));
}

/// Disjoint union of base and motif plus one bridging edge between a uniform
/// base node and a uniform motif node. One bridge creates no cycle, so the
/// result's simple-cycle count is the sum of the operands'.
inline Graph union_attach(const Graph& base, const Graph& motif, Rng& rng) {
  if (base.num_nodes() == 0 || motif.num_nodes() == 0)
    raise(errc::empty_graph, "union_attach requires non-empty operands");
  const int shift = base.num_nodes();
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(base.edges().size() + motif.edges().size() + 1);
  for (const Edge& e : base.edges()) pairs.emplace_back(e.u, e.v);
  for (const Edge& e : motif.edges()) pairs.emplace_back(e.u + shift, e.v + shift);
  const int from = rng.uniform_int(base.num_nodes());
  const int to = shift + rng.uniform_int(motif.num_nodes());
  pairs.emplace_back(from, to);

  std::optional<FeatureMatrix> features;
  if (base.features().has_value() != motif.features().has_value())
    raise(errc::feature_shape_mismatch, "union_attach: only one operand has features");
  if (base.features()) {
    const std::size_t wb = base.features()->empty() ? 0 : base.features()->front().size();
    const std::size_t wm = motif.features()->empty() ? 0 : motif.features()->front().size();
    if (wb != wm)
      raise(errc::feature_shape_mismatch, "union_attach: feature widths differ (" +
                                              std::to_string(wb) + " vs " + std::to_string(wm) + ")");
    FeatureMatrix f = *base.features();
    f.insert(f.end(), motif.features()->begin(), motif.features()->end());
    features = std::move(f);
  }
  return Graph(base.num_nodes() + motif.num_nodes(), std::move(pairs), std::move(features));
}

}  // namespace epag
