#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "epag/error.hpp"
#include "epag/explain.hpp"
#include "epag/graph.hpp"
#include "epag/rng.hpp"

namespace epag {

enum class MotifKind { house, cycle };

namespace detail {
inline FeatureMatrix unit_features(int n) { return FeatureMatrix(static_cast<std::size_t>(n), {1.0}); }
}  // namespace detail

/// Fixed motif layouts. House: base square 0-1-2-3 plus roof edges 3-4 and
/// 4-0; edge (0,3) is shared between the square and the roof triangle, which
/// is what makes the simple-cycle count 3 (square, triangle, outer pentagon).
inline Graph motif(MotifKind kind) {
  std::vector<std::pair<int, int>> edges;
  if (kind == MotifKind::house)
    edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}, {4, 0}};
  else
    edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  return Graph(5, std::move(edges), detail::unit_features(5));
}

/// Barabasi-Albert preferential attachment. Each new node attaches to m
/// distinct existing nodes chosen proportionally to degree (uniformly while
/// no edges exist yet). m = 1 grows a tree: n-1 edges, no cycles.
inline Graph ba_graph(int n, int m, Rng& rng) {
  if (n < 1 || m < 1 || (n > 1 && n <= m))
    raise(errc::invalid_parameters,
          "ba_graph requires n >= 1, m >= 1, n > m (got n=" + std::to_string(n) +
              ", m=" + std::to_string(m) + ")");
  std::vector<std::pair<int, int>> edges;
  std::vector<int> endpoints;  // each edge contributes both endpoints
  for (int v = (n == 1 ? 1 : (m > 1 ? m : 1)); v < n; ++v) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < std::min(m, v)) {
      int t;
      if (endpoints.empty())
        t = rng.uniform_int(v);
      else
        t = endpoints[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(endpoints.size())))];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (int t : targets) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Graph(n, std::move(edges), detail::unit_features(n));
}

/// One generated graph with its label and ground-truth explanation mask
/// (exactly the motif edges; never the bridge; empty for plain trees).
struct LabeledExample {
  Graph graph;
  ExplanationMask explanation;

  int label() const { return graph.label().value_or(-1); }
  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct DatasetSpec {
  enum class Variant { modified, original };
  int n_graphs = 0;
  double q = 0.5;
  int base_nodes = 20;
  std::uint64_t seed = 0;
  Variant variant = Variant::modified;
};

namespace detail {

inline void check_spec(const DatasetSpec& spec) {
  if (spec.n_graphs <= 0) raise(errc::invalid_parameters, "n_graphs must be positive");
  if (!(spec.q > 0.0 && spec.q < 1.0)) raise(errc::invalid_parameters, "q must lie in (0,1)");
  if (spec.base_nodes < 5) raise(errc::invalid_parameters, "base_nodes must be >= 5");
}

// Attach a motif and recover its edge ids in the canonicalized union.
inline LabeledExample attach_with_mask(const Graph& base, MotifKind kind, int label, Rng& rng) {
  const Graph m = motif(kind);
  Graph joined = with_label(union_attach(base, m, rng), label);
  std::vector<int> ids;
  ids.reserve(m.edges().size());
  for (const Edge& e : m.edges()) {
    const int id = joined.edge_index(e.u + base.num_nodes(), e.v + base.num_nodes());
    ids.push_back(id);
  }
  return LabeledExample{std::move(joined), ExplanationMask(std::move(ids))};
}

inline LabeledExample gen_example(const DatasetSpec& spec, int index) {
  Rng rng = Rng(spec.seed).derive(static_cast<std::uint64_t>(index));
  const int label = rng.uniform_int(2);
  const bool cycle_attached =
      spec.variant == DatasetSpec::Variant::original ? true : rng.bernoulli(spec.q);
  Graph base = ba_graph(spec.base_nodes, 1, rng);
  if (label == 0) return attach_with_mask(base, MotifKind::house, 0, rng);
  if (cycle_attached) return attach_with_mask(base, MotifKind::cycle, 1, rng);
  return LabeledExample{with_label(base, 1), ExplanationMask{}};
}

}  // namespace detail

/// Modified BA-2motifs: label 0 = BA tree + house motif; label 1 = BA tree,
/// with a cycle motif attached with probability q. Labels are drawn with a
/// uniform 1/2 prior. Deterministic per spec: example i derives its own
/// stream from (seed, i), so generation can be sharded by index.
inline std::vector<LabeledExample> gen_modified_ba2motifs(const DatasetSpec& spec) {
  detail::check_spec(spec);
  if (spec.variant != DatasetSpec::Variant::modified)
    raise(errc::invalid_parameters, "spec variant must be 'modified'");
  std::vector<LabeledExample> out;
  out.reserve(static_cast<std::size_t>(spec.n_graphs));
  for (int i = 0; i < spec.n_graphs; ++i) out.push_back(detail::gen_example(spec, i));
  return out;
}

/// Original BA-2motifs: label 0 = tree + house, label 1 = tree + five-node
/// cycle, motif always attached.
inline std::vector<LabeledExample> gen_ba2motifs(const DatasetSpec& spec) {
  detail::check_spec(spec);
  if (spec.variant != DatasetSpec::Variant::original)
    raise(errc::invalid_parameters, "spec variant must be 'original'");
  std::vector<LabeledExample> out;
  out.reserve(static_cast<std::size_t>(spec.n_graphs));
  for (int i = 0; i < spec.n_graphs; ++i) out.push_back(detail::gen_example(spec, i));
  return out;
}

}  // namespace epag
