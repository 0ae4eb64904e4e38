#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "epag/error.hpp"
#include "epag/graph.hpp"
#include "epag/rng.hpp"

namespace epag {

/// Edge-id subset marking the explanation subgraph G^(exp). Stored sorted
/// and deduplicated; validity against a concrete graph is checked at use.
class ExplanationMask {
 public:
  ExplanationMask() = default;
  explicit ExplanationMask(std::vector<int> edge_ids) : ids_(std::move(edge_ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  const std::vector<int>& edge_ids() const noexcept { return ids_; }
  bool empty() const noexcept { return ids_.empty(); }
  std::size_t size() const noexcept { return ids_.size(); }
  bool contains(int id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

  void check_against(const Graph& g) const {
    for (int id : ids_) {
      if (id < 0 || id >= g.num_edges())
        raise(errc::invalid_mask, "mask edge id " + std::to_string(id) + " out of range (graph has " +
                                      std::to_string(g.num_edges()) + " edges)");
    }
  }

  friend bool operator==(const ExplanationMask&, const ExplanationMask&) = default;

 private:
  std::vector<int> ids_;
};

/// Edge/node partition induced by a mask. exp_nodes are the endpoints of
/// masked edges; everything else is the marginal side. Crossing edges (one
/// endpoint on each side) belong to marginal_edges and are perturbable.
struct Decomposition {
  std::vector<int> exp_nodes;
  std::vector<int> marginal_nodes;
  std::vector<int> exp_edges;       // edge ids
  std::vector<int> marginal_edges;  // edge ids
};

inline Decomposition split_by_mask(const Graph& g, const ExplanationMask& mask) {
  mask.check_against(g);
  Decomposition d;
  std::vector<char> exp_node(g.num_nodes(), 0);
  for (int id : mask.edge_ids()) {
    exp_node[g.edges()[id].u] = 1;
    exp_node[g.edges()[id].v] = 1;
  }
  for (int v = 0; v < g.num_nodes(); ++v) (exp_node[v] ? d.exp_nodes : d.marginal_nodes).push_back(v);
  for (int e = 0; e < g.num_edges(); ++e)
    (mask.contains(e) ? d.exp_edges : d.marginal_edges).push_back(e);
  return d;
}

/// Uniformly seeded edge subset of the requested size grown by breadth-first
/// expansion over edge adjacency; restarts on exhaustion, so the result is
/// connected whenever the graph allows it.
inline ExplanationMask random_explainer(const Graph& g, int size, Rng& rng) {
  if (size < 0 || size > g.num_edges())
    raise(errc::size_too_large, "requested mask size " + std::to_string(size) + " exceeds " +
                                    std::to_string(g.num_edges()) + " edges");
  std::vector<int> chosen;
  if (size == 0) return ExplanationMask{};
  std::vector<char> in_chosen(g.num_edges(), 0), node_covered(g.num_nodes(), 0);
  auto adj = detail::adjacency(g);
  std::vector<int> frontier;  // candidate edge ids, sorted unique, not chosen
  auto expand = [&](int edge_id) {
    chosen.push_back(edge_id);
    in_chosen[edge_id] = 1;
    for (int x : {g.edges()[edge_id].u, g.edges()[edge_id].v}) {
      if (node_covered[x]) continue;
      node_covered[x] = 1;
      for (auto [w, e] : adj[x]) {
        if (!in_chosen[e] && !std::binary_search(frontier.begin(), frontier.end(), e))
          frontier.insert(std::lower_bound(frontier.begin(), frontier.end(), e), e);
      }
    }
    auto it = std::lower_bound(frontier.begin(), frontier.end(), edge_id);
    if (it != frontier.end() && *it == edge_id) frontier.erase(it);
  };
  while (static_cast<int>(chosen.size()) < size) {
    if (frontier.empty()) {
      std::vector<int> unused;
      for (int e = 0; e < g.num_edges(); ++e)
        if (!in_chosen[e]) unused.push_back(e);
      expand(unused[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(unused.size())))]);
    } else {
      expand(frontier[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(frontier.size())))]);
    }
  }
  return ExplanationMask(std::move(chosen));
}

/// Psi: maps a graph to its explanation mask. Implementations must be safe
/// to call concurrently.
class Explainer {
 public:
  virtual ~Explainer() = default;
  virtual ExplanationMask explain(const Graph& g) const = 0;
};

/// Returns the stored dataset mask. Deterministic by construction.
class GroundTruthExplainer final : public Explainer {
 public:
  explicit GroundTruthExplainer(ExplanationMask mask) : mask_(std::move(mask)) {}
  ExplanationMask explain(const Graph& g) const override {
    mask_.check_against(g);
    return mask_;
  }

 private:
  ExplanationMask mask_;
};

/// Baseline: a random connected edge subset of fixed size. The per-call seed
/// is derived from the base seed and a structural hash of the graph, so
/// repeated calls on the same graph return the same mask and concurrent use
/// needs no shared state.
class RandomExplainer final : public Explainer {
 public:
  RandomExplainer(int size, std::uint64_t seed) : size_(size), seed_(seed) {}
  ExplanationMask explain(const Graph& g) const override {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(g.num_nodes());
    for (const Edge& e : g.edges()) {
      h = (h ^ static_cast<std::uint64_t>(e.u)) * 0x100000001b3ULL;
      h = (h ^ static_cast<std::uint64_t>(e.v)) * 0x100000001b3ULL;
    }
    Rng rng = Rng(seed_).derive(h);
    const int size = std::min(size_, g.num_edges());
    return random_explainer(g, size, rng);
  }

 private:
  int size_;
  std::uint64_t seed_;
};

}  // namespace epag
