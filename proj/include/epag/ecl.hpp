#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epag/augment.hpp"
#include "epag/contrastive.hpp"
#include "epag/error.hpp"
#include "epag/graph.hpp"

namespace epag {

/// Augmented pairs (G_{i,1}, G_{i,2}) generated from a training set.
struct AugmentedTrainingSet {
  std::vector<AugmentedPair> pairs;
};

struct EclConfig {
  int kappa = 2;         // maximum number of blocks
  double epsilon = 0.5;  // score threshold; non-integer keeps d == epsilon unreachable
  int embed_dim = 8;
  // distance measure d(.,.); cycle distance is the only built-in
  std::function<double(const Graph&, const Graph&)> distance;

  double dist(const Graph& a, const Graph& b) const {
    if (distance) return distance(a, b);
    return static_cast<double>(cycle_distance(a, b));
  }
  void check() const {
    if (kappa < 1) raise(errc::invalid_parameters, "kappa must be >= 1");
    if (!(epsilon > 0.0)) raise(errc::invalid_parameters, "epsilon must be positive");
    // integer distances make d == epsilon reachable, an unscored case the
    // definition leaves open
    if (!distance && epsilon == std::floor(epsilon))
      raise(errc::invalid_parameters, "epsilon must be non-integer for the cycle distance");
  }
};

/// s_eps(G,G') counts pairs supporting co-clustering minus pairs opposing it.
/// Strict inequalities: a pair with d(G', G_{i,2}) == eps contributes nothing.
inline long long pairwise_score(const Graph& g, const Graph& h, const AugmentedTrainingSet& pairs,
                                const EclConfig& cfg) {
  cfg.check();
  long long score = 0;
  for (const AugmentedPair& pr : pairs.pairs) {
    if (!(cfg.dist(g, pr.first) < cfg.epsilon)) continue;
    const double d2 = cfg.dist(h, pr.second);
    if (d2 < cfg.epsilon)
      ++score;
    else if (d2 > cfg.epsilon)
      --score;
  }
  return score;
}

inline long long symmetric_score(const Graph& g, const Graph& h, const AugmentedTrainingSet& pairs,
                                 const EclConfig& cfg) {
  return pairwise_score(g, h, pairs, cfg) + pairwise_score(h, g, pairs, cfg);
}

/// Disjoint nonempty blocks of item indices covering [0, n).
struct Partition {
  std::vector<std::vector<int>> blocks;
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// pi_eps(P): sum over blocks of the symmetric scores of all ordered item
/// pairs in the block, diagonal included.
inline long long partition_score(const Partition& p, std::span<const Graph> items,
                                 const AugmentedTrainingSet& pairs, const EclConfig& cfg) {
  std::vector<std::vector<long long>> sbar(items.size(), std::vector<long long>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i; j < items.size(); ++j)
      sbar[i][j] = sbar[j][i] = symmetric_score(items[i], items[j], pairs, cfg);
  long long total = 0;
  for (const auto& block : p.blocks)
    for (int i : block)
      for (int j : block) total += sbar[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return total;
}

inline constexpr int kPartitionItemGuard = 13;

/// Visits every set partition of [0, n) with at most kappa blocks exactly
/// once, in restricted-growth-string lexicographic order (the canonical
/// order all tie-breaking refers to).
template <class Visitor>
void enumerate_partitions(int n_items, int kappa, Visitor&& visit) {
  if (n_items < 1) raise(errc::invalid_parameters, "n_items must be positive");
  if (kappa < 1) raise(errc::invalid_parameters, "kappa must be >= 1");
  if (n_items > kPartitionItemGuard)
    raise(errc::too_many_items, "exhaustive enumeration limited to " +
                                    std::to_string(kPartitionItemGuard) + " items, got " +
                                    std::to_string(n_items));
  std::vector<int> assign(static_cast<std::size_t>(n_items), 0);
  auto emit = [&](int n_blocks) {
    Partition p;
    p.blocks.assign(static_cast<std::size_t>(n_blocks), {});
    for (int i = 0; i < n_items; ++i) p.blocks[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(i);
    visit(p);
  };
  // iterative restricted-growth-string successor walk
  std::vector<int> prefix_max(static_cast<std::size_t>(n_items), 0);
  for (;;) {
    int blocks = 0;
    for (int i = 0; i < n_items; ++i) blocks = std::max(blocks, assign[static_cast<std::size_t>(i)] + 1);
    emit(blocks);
    // successor
    int i = n_items - 1;
    for (; i > 0; --i) {
      const int cap = std::min(prefix_max[static_cast<std::size_t>(i - 1)] + 1, kappa - 1);
      if (assign[static_cast<std::size_t>(i)] < cap) break;
    }
    if (i == 0) return;
    ++assign[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] =
        std::max(prefix_max[static_cast<std::size_t>(i - 1)], assign[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < n_items; ++j) {
      assign[static_cast<std::size_t>(j)] = 0;
      prefix_max[static_cast<std::size_t>(j)] = prefix_max[static_cast<std::size_t>(j - 1)];
    }
  }
}

inline std::vector<Partition> all_partitions(int n_items, int kappa) {
  std::vector<Partition> out;
  enumerate_partitions(n_items, kappa, [&](const Partition& p) { out.push_back(p); });
  return out;
}

/// k unit vectors in R^d with maximal minimum pairwise distance: the
/// vertices of a centered regular (k-1)-simplex on the unit sphere. k = 2
/// yields an antipodal pair, k = 1 a single basis vector.
inline std::vector<std::vector<double>> maximally_distinct_vectors(int k, int d) {
  if (k < 1 || d < 1) raise(errc::invalid_parameters, "k and d must be positive");
  if (k > d + 1)
    raise(errc::dimension_too_small, std::to_string(k) + " maximally distinct unit vectors need dimension >= " +
                                         std::to_string(k - 1) + ", got " + std::to_string(d));
  std::vector<std::vector<double>> out(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  if (k == 1) {
    out[0][0] = 1.0;
    return out;
  }
  // centered basis vectors e_i - (1/k)1 in R^k, expressed in an orthonormal
  // basis of their (k-1)-dimensional span via Gram-Schmidt
  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<std::vector<double>> centered(kk, std::vector<double>(kk, -1.0 / k));
  for (std::size_t i = 0; i < kk; ++i) centered[i][i] += 1.0;
  std::vector<std::vector<double>> basis;
  for (std::size_t i = 0; i + 1 < kk; ++i) {
    std::vector<double> v = centered[i];
    for (const auto& b : basis) {
      double proj = 0.0;
      for (std::size_t t = 0; t < kk; ++t) proj += v[t] * b[t];
      for (std::size_t t = 0; t < kk; ++t) v[t] -= proj * b[t];
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;
    basis.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < kk; ++i) {
    double nrm = 0.0;
    std::vector<double> coords(basis.size());
    for (std::size_t b = 0; b < basis.size(); ++b) {
      double c = 0.0;
      for (std::size_t t = 0; t < kk; ++t) c += centered[i][t] * basis[b][t];
      coords[b] = c;
      nrm += c * c;
    }
    nrm = std::sqrt(nrm);
    for (std::size_t b = 0; b < basis.size(); ++b) out[i][b] = coords[b] / nrm;
  }
  return out;
}

/// Fitted learner: the score-maximizing partition of the training items with
/// one maximally distinct unit embedding per block.
struct EclModel {
  Partition partition;
  std::vector<std::vector<double>> embeddings;  // one per block, unit norm
  std::vector<Graph> items;
  AugmentedTrainingSet pairs;
  EclConfig config;
};

/// Exhaustive search for the empirically optimal kappa-partition. Ties break
/// toward the earliest partition in canonical enumeration order.
inline EclModel fit_ecl(std::span<const Graph> items, AugmentedTrainingSet pairs, EclConfig cfg) {
  cfg.check();
  if (items.empty()) raise(errc::empty_training_set, "fit_ecl needs at least one item");
  const int n = static_cast<int>(items.size());
  if (n > kPartitionItemGuard)
    raise(errc::too_many_items, "fit_ecl is exhaustive and limited to " +
                                    std::to_string(kPartitionItemGuard) + " items; use the class-level learner");

  std::vector<std::vector<long long>> sbar(items.size(), std::vector<long long>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i; j < items.size(); ++j)
      sbar[i][j] = sbar[j][i] = symmetric_score(items[i], items[j], pairs, cfg);

  bool have_best = false;
  long long best_score = 0;
  Partition best;
  enumerate_partitions(n, cfg.kappa, [&](const Partition& p) {
    long long score = 0;
    for (const auto& block : p.blocks)
      for (int i : block)
        for (int j : block) score += sbar[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (!have_best || score > best_score) {
      have_best = true;
      best_score = score;
      best = p;
    }
  });

  EclModel model;
  model.embeddings = maximally_distinct_vectors(static_cast<int>(best.blocks.size()), cfg.embed_dim);
  model.partition = std::move(best);
  model.items.assign(items.begin(), items.end());
  model.pairs = std::move(pairs);
  model.config = std::move(cfg);
  return model;
}

/// f_enc(G): the embedding of the block with the highest average symmetric
/// score against G; ties go to the lowest canonical block index.
inline Embedding embed(const EclModel& model, const Graph& g) {
  if (model.partition.blocks.empty()) raise(errc::empty_training_set, "model has no blocks");
  int best_block = 0;
  double best_avg = 0.0;
  bool have = false;
  for (std::size_t b = 0; b < model.partition.blocks.size(); ++b) {
    const auto& block = model.partition.blocks[b];
    double total = 0.0;
    for (int i : block)
      total += static_cast<double>(
          symmetric_score(g, model.items[static_cast<std::size_t>(i)], model.pairs, model.config));
    const double avg = total / static_cast<double>(block.size());
    if (!have || avg > best_avg) {
      have = true;
      best_avg = avg;
      best_block = static_cast<int>(b);
    }
  }
  return model.embeddings[static_cast<std::size_t>(best_block)];
}

/// Exact empirical risk minimizer over classifiers of a finite embedding
/// alphabet: each distinct training embedding maps to its majority label
/// (ties -> the smaller label); unseen test embeddings fall back to the
/// nearest training value. Returns the misclassified fraction of the test
/// set.
inline double erm_fit_and_error(std::span<const Embedding> train_embeddings,
                                std::span<const int> train_labels,
                                std::span<const Embedding> test_embeddings,
                                std::span<const int> test_labels) {
  if (train_embeddings.empty()) raise(errc::empty_training_set, "ERM needs training data");
  if (train_embeddings.size() != train_labels.size() || test_embeddings.size() != test_labels.size())
    raise(errc::length_mismatch, "embeddings and labels differ in length");

  std::map<Embedding, std::map<int, int>> counts;
  for (std::size_t i = 0; i < train_embeddings.size(); ++i)
    counts[train_embeddings[i]][train_labels[i]] += 1;
  std::map<Embedding, int> rule;
  for (const auto& [emb, by_label] : counts) {
    int best_label = 0, best_count = -1;
    for (const auto& [label, c] : by_label) {
      if (c > best_count) {  // map order -> ties resolve to the smaller label
        best_count = c;
        best_label = label;
      }
    }
    rule[emb] = best_label;
  }

  if (test_embeddings.empty()) return 0.0;
  auto predict = [&](const Embedding& e) {
    auto it = rule.find(e);
    if (it != rule.end()) return it->second;
    double best_d = 0.0;
    const std::pair<const Embedding, int>* best = nullptr;
    for (const auto& kv : rule) {
      double d = 0.0;
      for (std::size_t t = 0; t < std::min(kv.first.size(), e.size()); ++t) {
        const double diff = kv.first[t] - e[t];
        d += diff * diff;
      }
      if (best == nullptr || d < best_d) {
        best_d = d;
        best = &kv;
      }
    }
    return best->second;
  };
  int errors = 0;
  for (std::size_t i = 0; i < test_embeddings.size(); ++i)
    if (predict(test_embeddings[i]) != test_labels[i]) ++errors;
  return static_cast<double>(errors) / static_cast<double>(test_embeddings.size());
}

}  // namespace epag
