#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "epag/augment.hpp"
#include "epag/ecl.hpp"
#include "epag/error.hpp"
#include "epag/graph.hpp"
#include "epag/synth.hpp"

namespace epag {

enum class Channel { semantic_agnostic, semantic_preserving };

inline const char* channel_name(Channel c) {
  return c == Channel::semantic_agnostic ? "sa" : "sp";
}

namespace detail {
inline int cycle_class_index(int count) {
  switch (count) {
    case 0: return 0;
    case 1: return 1;
    case 3: return 2;
  }
  raise(errc::unexpected_cycle_count,
        "cycle count " + std::to_string(count) + " outside {0,1,3}; generator or augmenter bug");
}
inline constexpr int kCycleClasses[3] = {0, 1, 3};
}  // namespace detail

/// omega_{k,l}: fraction of augmented pairs whose sides carry k and l simple
/// cycles, k,l in {0,1,3}. Stored symmetrized: off-diagonal ordered counts
/// are folded, so sum_k w[k][k] + sum_{k<l} 2 w[k][l] = 1.
class OmegaTable {
 public:
  double at(int k, int l) const {
    return w_[static_cast<std::size_t>(detail::cycle_class_index(k))]
             [static_cast<std::size_t>(detail::cycle_class_index(l))];
  }
  void set(int k, int l, double value) {
    const auto a = static_cast<std::size_t>(detail::cycle_class_index(k));
    const auto b = static_cast<std::size_t>(detail::cycle_class_index(l));
    w_[a][b] = w_[b][a] = value;
  }
  /// sum over unordered class pairs (off-diagonals counted twice)
  double total() const {
    double t = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) t += (a == b ? 1.0 : 2.0) * w_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    return t;
  }
  double max_abs_difference(const OmegaTable& other) const {
    double m = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        m = std::max(m, std::abs(w_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -
                                 other.w_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]));
    return m;
  }

 private:
  double w_[3][3] = {};
};

/// Expected symmetric scores between cycle classes, normalized per training
/// item.
class ScoreTable {
 public:
  double at(int k, int l) const {
    return s_[static_cast<std::size_t>(detail::cycle_class_index(k))]
             [static_cast<std::size_t>(detail::cycle_class_index(l))];
  }
  void set(int k, int l, double value) {
    const auto a = static_cast<std::size_t>(detail::cycle_class_index(k));
    const auto b = static_cast<std::size_t>(detail::cycle_class_index(l));
    s_[a][b] = s_[b][a] = value;
  }

 private:
  double s_[3][3] = {};
};

namespace detail {

/// Cycle-count distribution of one motif under iid edge drop, as closed
/// forms. The house decomposes into the shared edge, two roof-triangle
/// edges, and three remaining square edges; exactly one cycle survives via
/// the intact pentagon (shared edge dropped), the intact square (triangle
/// broken), or the intact triangle (square broken).
struct MotifMarginal {
  double p0 = 0.0, p1 = 0.0, p3 = 0.0;
  double at(int k) const { return k == 0 ? p0 : (k == 1 ? p1 : p3); }
};

inline MotifMarginal house_marginal_closed_form(double p) {
  const double a = 1.0 - p;
  MotifMarginal m;
  m.p3 = std::pow(a, 6);
  m.p1 = p * std::pow(a, 5) + std::pow(a, 4) * (1.0 - a * a) + std::pow(a, 3) * (1.0 - a * a * a);
  m.p0 = p * (1.0 - std::pow(a, 5)) + a * (1.0 - a * a) * (1.0 - a * a * a);
  return m;
}

inline MotifMarginal cycle_marginal_closed_form(double p) {
  const double a = 1.0 - p;
  MotifMarginal m;
  m.p1 = std::pow(a, 5);
  m.p0 = 1.0 - m.p1;
  return m;
}

inline OmegaTable mix_marginals(const MotifMarginal& house, const MotifMarginal& cycle, double q) {
  const MotifMarginal tree{1.0, 0.0, 0.0};
  OmegaTable w;
  const std::pair<const MotifMarginal*, double> classes[] = {
      {&house, 0.5}, {&cycle, q / 2.0}, {&tree, (1.0 - q) / 2.0}};
  for (int k : kCycleClasses) {
    for (int l : kCycleClasses) {
      if (l < k) continue;
      double total = 0.0;
      for (auto [marginal, weight] : classes) total += weight * marginal->at(k) * marginal->at(l);
      w.set(k, l, total);
    }
  }
  return w;
}

}  // namespace detail

/// The closed-form E(omega) table. Semantic-preserving leaves house edges
/// untouched, so house pairs contribute only to omega_{3,3} and the
/// cross-house entries omega_{0,3}, omega_{1,3} vanish.
inline OmegaTable expected_omega(double p, double q, Channel channel) {
  if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0))
    raise(errc::invalid_parameters, "expected_omega needs p, q in (0,1)");
  detail::MotifMarginal house = channel == Channel::semantic_preserving
                                    ? detail::MotifMarginal{0.0, 0.0, 1.0}
                                    : detail::house_marginal_closed_form(p);
  return detail::mix_marginals(house, detail::cycle_marginal_closed_form(p), q);
}

/// Authoritative oracle: enumerate every drop pattern of the motif edges
/// (2^6 house, 2^5 cycle), weight by p^dropped (1-p)^kept, count the cycles
/// of the surviving subgraph with count_simple_cycles, and mix the per-class
/// marginals. Tree and bridge edges never carry cycles, so only motif
/// patterns need enumeration.
inline OmegaTable brute_force_omega(double p, double q, Channel channel) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    raise(errc::invalid_parameters, "brute_force_omega needs p, q in [0,1]");
  auto marginal_of = [](const Graph& m, double drop) {
    detail::MotifMarginal out;
    const int ne = m.num_edges();
    for (std::uint32_t pattern = 0; pattern < (std::uint32_t{1} << ne); ++pattern) {
      std::vector<std::pair<int, int>> kept;
      for (int e = 0; e < ne; ++e)
        if (pattern >> e & 1) kept.emplace_back(m.edges()[static_cast<std::size_t>(e)].u,
                                                m.edges()[static_cast<std::size_t>(e)].v);
      const int dropped = ne - static_cast<int>(kept.size());
      const double weight = std::pow(drop, dropped) * std::pow(1.0 - drop, ne - dropped);
      const int cycles = count_simple_cycles(Graph(m.num_nodes(), std::move(kept)));
      if (cycles == 0)
        out.p0 += weight;
      else if (cycles == 1)
        out.p1 += weight;
      else
        out.p3 += weight;
    }
    return out;
  };
  const double house_drop = channel == Channel::semantic_preserving ? 0.0 : p;
  return detail::mix_marginals(marginal_of(motif(MotifKind::house), house_drop),
                               marginal_of(motif(MotifKind::cycle), p), q);
}

/// Symmetrized empirical fractions over the pair set. A cycle count outside
/// {0,1,3} is a generator/augmenter bug and raises.
inline OmegaTable empirical_omega(const AugmentedTrainingSet& pairs) {
  if (pairs.pairs.empty()) raise(errc::empty_pair_set, "empirical_omega needs at least one pair");
  double counts[3][3] = {};
  for (const AugmentedPair& pr : pairs.pairs) {
    const int a = detail::cycle_class_index(count_simple_cycles(pr.first));
    const int b = detail::cycle_class_index(count_simple_cycles(pr.second));
    counts[a][b] += 1.0;
  }
  const double n = static_cast<double>(pairs.pairs.size());
  OmegaTable w;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b)
      w.set(detail::kCycleClasses[a], detail::kCycleClasses[b],
            a == b ? counts[a][b] / n : (counts[a][b] + counts[b][a]) / (2.0 * n));
  return w;
}

/// The six expected symmetric scores:
///   S_kk = 2(w_kk - w_kx - w_ky),  S_kl = 2 w_kl - w_kk - w_ll - w_kx' - w_lx'
/// with x, y the other classes.
inline ScoreTable expected_scores(const OmegaTable& w) {
  ScoreTable s;
  s.set(0, 0, 2.0 * (w.at(0, 0) - w.at(0, 1) - w.at(0, 3)));
  s.set(1, 1, 2.0 * (w.at(1, 1) - w.at(0, 1) - w.at(1, 3)));
  s.set(3, 3, 2.0 * (w.at(3, 3) - w.at(0, 3) - w.at(1, 3)));
  s.set(0, 1, 2.0 * w.at(0, 1) - w.at(0, 0) - w.at(0, 3) - w.at(1, 1) - w.at(1, 3));
  s.set(0, 3, 2.0 * w.at(0, 3) - w.at(0, 0) - w.at(0, 1) - w.at(1, 3) - w.at(3, 3));
  s.set(1, 3, 2.0 * w.at(1, 3) - w.at(0, 1) - w.at(1, 1) - w.at(0, 3) - w.at(3, 3));
  return s;
}

/// The four partitions of the cycle classes {C0, C1, C3} with at most two
/// blocks: P1 = {{C0,C1,C3}}, P2 = {{C0,C1},{C3}}, P3 = {{C0},{C1,C3}},
/// P4 = {{C1},{C0,C3}}.
inline const std::vector<std::vector<std::vector<int>>>& class_partitions() {
  static const std::vector<std::vector<std::vector<int>>> parts = {
      {{0, 1, 3}},
      {{0, 1}, {3}},
      {{0}, {1, 3}},
      {{1}, {0, 3}},
  };
  return parts;
}

struct ClassPartitionScores {
  std::array<double, 4> pi{};  // scores of P1..P4
  int best = 1;                // 1-based index of the argmax (ties -> lowest)
};

/// pi_{P_j} = 2 * (sum of S entries over within-block class pairs, diagonal
/// included), exactly the class-level forms used by the theory.
inline ClassPartitionScores class_level_partition_scores(const ScoreTable& s) {
  ClassPartitionScores out;
  const auto& parts = class_partitions();
  for (std::size_t j = 0; j < parts.size(); ++j) {
    double total = 0.0;
    for (const auto& block : parts[j]) {
      for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t b = a; b < block.size(); ++b) total += s.at(block[a], block[b]);
    }
    out.pi[j] = 2.0 * total;
  }
  out.best = 1;
  for (int j = 1; j < 4; ++j)
    if (out.pi[static_cast<std::size_t>(j)] > out.pi[static_cast<std::size_t>(out.best - 1)]) out.best = j + 1;
  return out;
}

/// Block of `partition` whose weighted average symmetric score against the
/// probe class is highest; weights are the training-set class counts. Ties
/// and empty blocks resolve toward the lowest index.
inline int embed_class(int probe_class, const std::vector<std::vector<int>>& partition,
                       const std::array<long long, 3>& class_counts, const ScoreTable& s) {
  int best_block = 0;
  double best_avg = 0.0;
  bool have = false;
  for (std::size_t b = 0; b < partition.size(); ++b) {
    long long weight = 0;
    double total = 0.0;
    for (int cls : partition[b]) {
      const long long n = class_counts[static_cast<std::size_t>(detail::cycle_class_index(cls))];
      weight += n;
      total += static_cast<double>(n) * s.at(probe_class, cls);
    }
    if (weight == 0) continue;
    const double avg = total / static_cast<double>(weight);
    if (!have || avg > best_avg) {
      have = true;
      best_avg = avg;
      best_block = static_cast<int>(b);
    }
  }
  if (!have) raise(errc::empty_training_set, "all blocks empty under the class counts");
  return best_block;
}

struct InequalityReport {
  double p = 0.0;
  double s01 = 0.0, s03 = 0.0, s13 = 0.0;
  bool ordering_holds = false;  // channel-specific ordering claim
  int argmax_partition = 1;     // 1..4
};

/// Evaluates the ordering claims over a p grid. Semantic-agnostic:
/// 0 > S_13 > max(S_01, S_03). Semantic-preserving: 0 > S_01 > max(S_03, S_13).
inline std::vector<InequalityReport> check_inequalities(std::span<const double> p_grid, double q,
                                                        Channel channel) {
  std::vector<InequalityReport> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) {
    const ScoreTable s = expected_scores(expected_omega(p, q, channel));
    InequalityReport r;
    r.p = p;
    r.s01 = s.at(0, 1);
    r.s03 = s.at(0, 3);
    r.s13 = s.at(1, 3);
    if (channel == Channel::semantic_agnostic)
      r.ordering_holds = 0.0 > r.s13 && r.s13 > std::max(r.s01, r.s03);
    else
      r.ordering_holds = 0.0 > r.s01 && r.s01 > std::max(r.s03, r.s13);
    r.argmax_partition = class_level_partition_scores(s).best;
    out.push_back(r);
  }
  return out;
}

struct TheoremConfig {
  double p = 0.4;
  double q = 0.5;
  int n_unlabeled = 2000;
  int n_labeled = 50;
  int n_test = 2000;
  int trials = 20;
  Channel channel = Channel::semantic_agnostic;
  std::uint64_t seed = 0;
  int base_nodes = 20;

  void check() const {
    if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0))
      raise(errc::invalid_parameters, "theorem config needs p, q in (0,1)");
    if (n_unlabeled <= 0 || n_labeled <= 0 || n_test <= 0 || trials <= 0)
      raise(errc::invalid_parameters, "theorem config sizes must be positive");
  }
};

struct TrialOutcome {
  double error_rate = 0.0;
  int selected_partition = 1;  // 1..4
  std::uint64_t seed = 0;
};

struct TheoremResult {
  std::vector<TrialOutcome> trials;
  double mean_error = 0.0;
  double stddev_error = 0.0;
};

namespace detail {

/// Semantic-preserving drops exempt exactly the house motif's edges, which
/// is the explanation mask of label-0 graphs. Cycle-motif and tree edges
/// stay droppable; omega_{0,1} > 0 under this channel.
inline const ExplanationMask& channel_exempt(const LabeledExample& ex, Channel channel) {
  static const ExplanationMask empty{};
  if (channel == Channel::semantic_preserving && ex.label() == 0) return ex.explanation;
  return empty;
}

/// One Monte Carlo trial: generate the unlabeled set, push every graph twice
/// through the edge-drop channel, read off the empirical omega and class
/// scores, pick the class-level partition, embed fresh labeled/test draws by
/// cycle-count class, and score the ERM readout.
inline TrialOutcome run_theorem1_trial(const TheoremConfig& cfg, int trial) {
  Rng trial_rng = Rng(cfg.seed).derive(0x7468656f72656dULL + static_cast<std::uint64_t>(trial));
  const std::uint64_t ds_seed = trial_rng.next();
  const std::uint64_t aug_seed = trial_rng.next();
  const std::uint64_t lab_seed = trial_rng.next();
  const std::uint64_t test_seed = trial_rng.next();

  DatasetSpec unlabeled_spec{cfg.n_unlabeled, cfg.q, cfg.base_nodes, ds_seed,
                             DatasetSpec::Variant::modified};
  const auto unlabeled = gen_modified_ba2motifs(unlabeled_spec);

  AugmentedTrainingSet pairs;
  pairs.pairs.reserve(unlabeled.size());
  std::array<long long, 3> class_counts{};
  Rng aug_rng(aug_seed);
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    const LabeledExample& ex = unlabeled[i];
    class_counts[static_cast<std::size_t>(cycle_class_index(count_simple_cycles(ex.graph)))] += 1;
    const ExplanationMask& exempt = channel_exempt(ex, cfg.channel);
    Rng r = aug_rng.derive(i);
    Graph a = iid_edge_drop(ex.graph, exempt, cfg.p, r);
    Graph b = iid_edge_drop(ex.graph, exempt, cfg.p, r);
    pairs.pairs.push_back(AugmentedPair{std::move(a), std::move(b), static_cast<int>(i)});
  }

  const ScoreTable scores = expected_scores(empirical_omega(pairs));
  const ClassPartitionScores selection = class_level_partition_scores(scores);
  const auto& partition = class_partitions()[static_cast<std::size_t>(selection.best - 1)];
  const auto block_embeddings = maximally_distinct_vectors(static_cast<int>(partition.size()), 8);

  auto embed_set = [&](const std::vector<LabeledExample>& examples,
                       std::vector<Embedding>& embeddings, std::vector<int>& labels) {
    embeddings.reserve(examples.size());
    labels.reserve(examples.size());
    for (const LabeledExample& ex : examples) {
      const int cls = count_simple_cycles(ex.graph);
      const int block = embed_class(cls, partition, class_counts, scores);
      embeddings.push_back(block_embeddings[static_cast<std::size_t>(block)]);
      labels.push_back(ex.label());
    }
  };
  DatasetSpec labeled_spec{cfg.n_labeled, cfg.q, cfg.base_nodes, lab_seed,
                           DatasetSpec::Variant::modified};
  DatasetSpec test_spec{cfg.n_test, cfg.q, cfg.base_nodes, test_seed,
                        DatasetSpec::Variant::modified};
  std::vector<Embedding> train_embeddings, test_embeddings;
  std::vector<int> train_labels, test_labels;
  embed_set(gen_modified_ba2motifs(labeled_spec), train_embeddings, train_labels);
  embed_set(gen_modified_ba2motifs(test_spec), test_embeddings, test_labels);

  const double error =
      erm_fit_and_error(train_embeddings, train_labels, test_embeddings, test_labels);
  return TrialOutcome{error, selection.best, trial_rng.seed()};
}

}  // namespace detail

/// Monte Carlo aggregation. Trials are independent, each derives its own
/// seed from (cfg.seed, trial index) and writes its own slot, so the result
/// is identical for any thread count.
inline TheoremResult run_theorem1_mc(const TheoremConfig& cfg) {
  cfg.check();
  TheoremResult result;
  result.trials.resize(static_cast<std::size_t>(cfg.trials));

  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = std::max(1, std::min<int>(cfg.trials, hw == 0 ? 1 : static_cast<int>(hw)));
  if (workers == 1) {
    for (int t = 0; t < cfg.trials; ++t)
      result.trials[static_cast<std::size_t>(t)] = detail::run_theorem1_trial(cfg, t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= cfg.trials) return;
          result.trials[static_cast<std::size_t>(t)] = detail::run_theorem1_trial(cfg, t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  double mean = 0.0;
  for (const TrialOutcome& t : result.trials) mean += t.error_rate;
  mean /= static_cast<double>(result.trials.size());
  double var = 0.0;
  for (const TrialOutcome& t : result.trials) var += (t.error_rate - mean) * (t.error_rate - mean);
  result.mean_error = mean;
  result.stddev_error =
      result.trials.size() > 1 ? std::sqrt(var / static_cast<double>(result.trials.size() - 1)) : 0.0;
  return result;
}

}  // namespace epag
