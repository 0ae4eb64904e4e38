#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epag/error.hpp"
#include "epag/explain.hpp"
#include "epag/graph.hpp"
#include "epag/rng.hpp"

namespace epag {

enum class AugmentMethod { node_drop, edge_drop, attr_mask, subgraph, mixup };

inline constexpr AugmentMethod kAllAugmentMethods[] = {
    AugmentMethod::node_drop, AugmentMethod::edge_drop, AugmentMethod::attr_mask,
    AugmentMethod::subgraph, AugmentMethod::mixup};

struct AugmentConfig {
  double ratio = 0.1;  // perturbation probability p in [0,1]
  AugmentMethod method = AugmentMethod::edge_drop;
};

/// Augmented graph plus the node renumbering: node_map[new_id] = original id.
/// Operators that cannot remove nodes return the identity map.
struct Augmented {
  Graph graph;
  std::vector<int> node_map;
};

namespace detail {

inline void check_ratio(double p) {
  if (!(p >= 0.0 && p <= 1.0)) raise(errc::invalid_parameters, "ratio p must lie in [0,1]");
}

struct MaskView {
  std::vector<char> exp_node;  // per node
  std::vector<char> exp_edge;  // per edge
};

inline MaskView mask_view(const Graph& g, const ExplanationMask& mask) {
  mask.check_against(g);
  MaskView v{std::vector<char>(g.num_nodes(), 0), std::vector<char>(g.num_edges(), 0)};
  for (int id : mask.edge_ids()) {
    v.exp_edge[id] = 1;
    v.exp_node[g.edges()[id].u] = 1;
    v.exp_node[g.edges()[id].v] = 1;
  }
  return v;
}

/// Rebuild a graph from kept nodes and kept edge ids, renumbering nodes by
/// ascending original index and carrying feature rows and the label.
inline Augmented subgraph_of(const Graph& g, const std::vector<char>& keep_node,
                             const std::vector<int>& keep_edges) {
  std::vector<int> node_map;
  std::vector<int> new_id(g.num_nodes(), -1);
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (keep_node[v]) {
      new_id[v] = static_cast<int>(node_map.size());
      node_map.push_back(v);
    }
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(keep_edges.size());
  for (int e : keep_edges) pairs.emplace_back(new_id[g.edges()[e].u], new_id[g.edges()[e].v]);
  std::optional<FeatureMatrix> features;
  if (g.features()) {
    FeatureMatrix f;
    f.reserve(node_map.size());
    for (int old : node_map) f.push_back((*g.features())[static_cast<std::size_t>(old)]);
    features = std::move(f);
  }
  return Augmented{Graph(static_cast<int>(node_map.size()), std::move(pairs), std::move(features),
                         g.label()),
                   std::move(node_map)};
}

inline std::vector<int> identity_map(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return m;
}

}  // namespace detail

/// Keeps every marginal node independently with probability 1-p; explanation
/// nodes and edges always survive. A marginal edge survives iff all its
/// endpoints survive, where explanation endpoints count as surviving, so a
/// crossing edge lives or dies with its marginal endpoint.
inline Augmented epa_node_drop(const Graph& g, const ExplanationMask& mask, double p, Rng& rng) {
  detail::check_ratio(p);
  auto mv = detail::mask_view(g, mask);
  std::vector<char> keep(g.num_nodes(), 0);
  for (int v = 0; v < g.num_nodes(); ++v) keep[v] = mv.exp_node[v] || rng.bernoulli(1.0 - p);
  std::vector<int> keep_edges;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (mv.exp_edge[e] || (keep[g.edges()[e].u] && keep[g.edges()[e].v])) keep_edges.push_back(e);
  }
  return detail::subgraph_of(g, keep, keep_edges);
}

/// Keeps every marginal edge independently with probability 1-p; marginal
/// nodes are retained only when incident to a kept marginal edge.
inline Augmented epa_edge_drop(const Graph& g, const ExplanationMask& mask, double p, Rng& rng) {
  detail::check_ratio(p);
  auto mv = detail::mask_view(g, mask);
  std::vector<int> keep_edges;
  std::vector<char> keep_node = mv.exp_node;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (mv.exp_edge[e]) {
      keep_edges.push_back(e);
    } else if (rng.bernoulli(1.0 - p)) {
      keep_edges.push_back(e);
      keep_node[g.edges()[e].u] = 1;
      keep_node[g.edges()[e].v] = 1;
    }
  }
  return detail::subgraph_of(g, keep_node, keep_edges);
}

/// Zeroes each feature entry of each marginal node independently with
/// probability p. Topology and explanation-node features are untouched.
inline Augmented epa_attr_mask(const Graph& g, const ExplanationMask& mask, double p, Rng& rng) {
  detail::check_ratio(p);
  if (!g.features()) raise(errc::no_features, "attribute masking requires node features");
  auto mv = detail::mask_view(g, mask);
  FeatureMatrix f = *g.features();
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (mv.exp_node[v]) continue;
    for (double& x : f[static_cast<std::size_t>(v)])
      if (rng.bernoulli(p)) x = 0.0;
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(g.edges().size());
  for (const Edge& e : g.edges()) pairs.emplace_back(e.u, e.v);
  return Augmented{Graph(g.num_nodes(), std::move(pairs), std::move(f), g.label()),
                   detail::identity_map(g.num_nodes())};
}

/// Grows a node sample inside the marginal subgraph by random neighbor
/// expansion until ceil(p * |marginal nodes|) nodes are collected, restarting
/// from a fresh random unvisited marginal node whenever the frontier runs
/// dry. Kept marginal edges have one endpoint sampled and the other endpoint
/// present (sampled or explanation).
inline Augmented epa_subgraph(const Graph& g, const ExplanationMask& mask, double p, Rng& rng) {
  detail::check_ratio(p);
  auto mv = detail::mask_view(g, mask);
  std::vector<int> marginal_nodes;
  for (int v = 0; v < g.num_nodes(); ++v)
    if (!mv.exp_node[v]) marginal_nodes.push_back(v);
  const int target = std::min<int>(static_cast<int>(marginal_nodes.size()),
                                   static_cast<int>(std::ceil(p * static_cast<double>(marginal_nodes.size()))));

  // marginal-marginal adjacency for the walk
  std::vector<std::vector<int>> adj(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) {
    if (mv.exp_edge[e]) continue;
    const Edge& ed = g.edges()[e];
    if (!mv.exp_node[ed.u] && !mv.exp_node[ed.v]) {
      adj[ed.u].push_back(ed.v);
      adj[ed.v].push_back(ed.u);
    }
  }

  std::vector<char> sampled(g.num_nodes(), 0);
  std::vector<int> frontier;  // sorted unique, excludes sampled
  int n_sampled = 0;
  auto add = [&](int v) {
    sampled[v] = 1;
    ++n_sampled;
    auto it = std::lower_bound(frontier.begin(), frontier.end(), v);
    if (it != frontier.end() && *it == v) frontier.erase(it);
    for (int w : adj[v]) {
      if (sampled[w]) continue;
      auto pos = std::lower_bound(frontier.begin(), frontier.end(), w);
      if (pos == frontier.end() || *pos != w) frontier.insert(pos, w);
    }
  };
  while (n_sampled < target) {
    if (frontier.empty()) {
      std::vector<int> fresh;
      for (int v : marginal_nodes)
        if (!sampled[v]) fresh.push_back(v);
      add(fresh[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(fresh.size())))]);
    } else {
      add(frontier[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(frontier.size())))]);
    }
  }

  std::vector<char> keep_node = mv.exp_node;
  for (int v = 0; v < g.num_nodes(); ++v)
    if (sampled[v]) keep_node[v] = 1;
  std::vector<int> keep_edges;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (mv.exp_edge[e]) {
      keep_edges.push_back(e);
      continue;
    }
    const Edge& ed = g.edges()[e];
    const bool u_s = sampled[ed.u], v_s = sampled[ed.v];
    const bool u_p = u_s || mv.exp_node[ed.u], v_p = v_s || mv.exp_node[ed.v];
    if ((u_s || v_s) && u_p && v_p) keep_edges.push_back(e);
  }
  return detail::subgraph_of(g, keep_node, keep_edges);
}

/// Replaces the marginal subgraph of g with (a sample of) the donor's
/// marginal subgraph. The node set of g is preserved: slots keep their ids,
/// mapped slots take the donor node's feature row, unmapped remainder keeps
/// its own internal structure.
inline Augmented epa_mixup(const Graph& g, const ExplanationMask& mask, const Graph& donor,
                           const ExplanationMask& donor_mask, Rng& rng) {
  auto mv = detail::mask_view(g, mask);
  auto dv = detail::mask_view(donor, donor_mask);

  const bool gf = g.features().has_value(), df = donor.features().has_value();
  if (gf != df) raise(errc::feature_dim_mismatch, "mixup: only one graph has features");
  if (gf) {
    const std::size_t wg = g.features()->empty() ? 0 : g.features()->front().size();
    const std::size_t wd = donor.features()->empty() ? 0 : donor.features()->front().size();
    if (wg != wd)
      raise(errc::feature_dim_mismatch, "mixup: feature widths differ (" + std::to_string(wg) +
                                            " vs " + std::to_string(wd) + ")");
  }

  std::vector<int> slots, donor_nodes;  // marginal node ids, ascending
  for (int v = 0; v < g.num_nodes(); ++v)
    if (!mv.exp_node[v]) slots.push_back(v);
  for (int v = 0; v < donor.num_nodes(); ++v)
    if (!dv.exp_node[v]) donor_nodes.push_back(v);

  auto sample_prefix = [&rng](std::vector<int>& pool, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size() - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
  };

  // slot -> donor node for mapped slots, -1 otherwise
  std::vector<int> donor_of(g.num_nodes(), -1);
  std::vector<char> mapped(g.num_nodes(), 0);
  std::vector<int> donor_slot(donor.num_nodes(), -1);
  if (slots.size() <= donor_nodes.size()) {
    std::vector<int> picked = donor_nodes;
    sample_prefix(picked, slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      donor_of[slots[i]] = picked[i];
      donor_slot[picked[i]] = slots[i];
      mapped[slots[i]] = 1;
    }
  } else {
    std::vector<int> mix = slots;
    sample_prefix(mix, donor_nodes.size());
    for (std::size_t i = 0; i < mix.size(); ++i) {
      donor_of[mix[i]] = donor_nodes[i];
      donor_slot[donor_nodes[i]] = mix[i];
      mapped[mix[i]] = 1;
    }
  }

  std::vector<std::pair<int, int>> pairs;
  for (int id : mask.edge_ids()) pairs.emplace_back(g.edges()[id].u, g.edges()[id].v);
  // donor marginal edges among mapped donor nodes, pulled onto the slots
  for (int e = 0; e < donor.num_edges(); ++e) {
    if (dv.exp_edge[e]) continue;
    const Edge& ed = donor.edges()[e];
    if (donor_slot[ed.u] >= 0 && donor_slot[ed.v] >= 0)
      pairs.emplace_back(donor_slot[ed.u], donor_slot[ed.v]);
  }
  // unmapped remainder keeps its own internal marginal edges
  for (int e = 0; e < g.num_edges(); ++e) {
    if (mv.exp_edge[e]) continue;
    const Edge& ed = g.edges()[e];
    if (!mv.exp_node[ed.u] && !mv.exp_node[ed.v] && !mapped[ed.u] && !mapped[ed.v])
      pairs.emplace_back(ed.u, ed.v);
  }

  std::optional<FeatureMatrix> features;
  if (gf) {
    FeatureMatrix f = *g.features();
    for (int v = 0; v < g.num_nodes(); ++v)
      if (donor_of[v] >= 0) f[static_cast<std::size_t>(v)] = (*donor.features())[static_cast<std::size_t>(donor_of[v])];
    features = std::move(f);
  }
  return Augmented{Graph(g.num_nodes(), std::move(pairs), std::move(features), g.label()),
                   detail::identity_map(g.num_nodes())};
}

/// Theorem channel: every non-exempt edge is dropped independently with
/// probability p; the node set never changes. Distinct from epa_edge_drop,
/// which removes isolated marginal nodes.
inline Graph iid_edge_drop(const Graph& g, const ExplanationMask& exempt, double p, Rng& rng) {
  detail::check_ratio(p);
  exempt.check_against(g);
  std::vector<std::pair<int, int>> pairs;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (exempt.contains(e) || !rng.bernoulli(p)) pairs.emplace_back(g.edges()[e].u, g.edges()[e].v);
  }
  return Graph(g.num_nodes(), std::move(pairs), g.features(), g.label());
}

struct AugmentedPair {
  Graph first;
  Graph second;
  int source_id = -1;
};

struct MaskedGraph {
  const Graph* graph;
  const ExplanationMask* mask;
};

inline Augmented apply_augmentation(const Graph& g, const ExplanationMask& mask,
                                    AugmentMethod method, double p, Rng& rng,
                                    std::span<const MaskedGraph> donors = {}) {
  switch (method) {
    case AugmentMethod::node_drop:
      return epa_node_drop(g, mask, p, rng);
    case AugmentMethod::edge_drop:
      return epa_edge_drop(g, mask, p, rng);
    case AugmentMethod::attr_mask:
      return epa_attr_mask(g, mask, p, rng);
    case AugmentMethod::subgraph:
      return epa_subgraph(g, mask, p, rng);
    case AugmentMethod::mixup: {
      if (donors.empty()) return epa_mixup(g, mask, g, mask, rng);
      const auto& d = donors[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(donors.size())))];
      return epa_mixup(g, mask, *d.graph, *d.mask, rng);
    }
  }
  raise(errc::invalid_parameters, "unknown augmentation method");
}

/// Two views of g from two independently and uniformly drawn methods, each
/// applied with independent randomness. Mixup donors come from the optional
/// pool; with no pool, mixup degenerates to self-mixup.
inline AugmentedPair sample_epa_pair(const Graph& g, const ExplanationMask& mask,
                                     std::span<const AugmentMethod> methods, double p, Rng& rng,
                                     std::span<const MaskedGraph> donors = {}, int source_id = -1) {
  if (methods.empty()) raise(errc::invalid_parameters, "method set must be nonempty");
  const AugmentMethod m1 = methods[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(methods.size())))];
  const AugmentMethod m2 = methods[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(methods.size())))];
  Graph first = apply_augmentation(g, mask, m1, p, rng, donors).graph;
  Graph second = apply_augmentation(g, mask, m2, p, rng, donors).graph;
  return AugmentedPair{std::move(first), std::move(second), source_id};
}

}  // namespace epag
