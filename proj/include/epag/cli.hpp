#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epag/augment.hpp"
#include "epag/contrastive.hpp"
#include "epag/ecl.hpp"
#include "epag/io.hpp"
#include "epag/synth.hpp"
#include "epag/theory.hpp"

namespace epag::cli {

namespace detail {

inline AugmentMethod parse_method(const std::string& name) {
  if (name == "node-drop") return AugmentMethod::node_drop;
  if (name == "edge-drop") return AugmentMethod::edge_drop;
  if (name == "attr-mask") return AugmentMethod::attr_mask;
  if (name == "subgraph") return AugmentMethod::subgraph;
  if (name == "mixup") return AugmentMethod::mixup;
  raise(errc::invalid_parameters, "unknown augmentation method '" + name + "'");
}

inline Channel parse_channel(const std::string& name) {
  if (name == "sa" || name == "semantic-agnostic") return Channel::semantic_agnostic;
  if (name == "sp" || name == "semantic-preserving") return Channel::semantic_preserving;
  raise(errc::invalid_parameters, "unknown channel '" + name + "' (expected sa or sp)");
}

/// "start:stop:step" (inclusive endpoints) or a comma-separated list.
inline std::vector<double> parse_p_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0)
      raise(errc::invalid_parameters, "bad p grid '" + text + "', expected start:stop:step");
    const int steps = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= steps; ++i) grid.push_back(start + i * step);
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) grid.push_back(std::stod(tok));
    }
  }
  if (grid.empty()) raise(errc::invalid_parameters, "empty p grid '" + text + "'");
  return grid;
}

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;  // flag wins over the environment
  if (const char* env = std::getenv("SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

inline void print_omega(const char* title, const OmegaTable& w) {
  std::printf("%s\n      k=0            k=1            k=3\n", title);
  for (int k : {0, 1, 3}) {
    std::printf("l=%d", k);
    for (int l : {0, 1, 3}) std::printf("  %.12f", w.at(k, l));
    std::printf("\n");
  }
}

inline int run_gen(const DatasetSpec& spec, const std::string& out_path) {
  const auto dataset = spec.variant == DatasetSpec::Variant::modified
                           ? gen_modified_ba2motifs(spec)
                           : gen_ba2motifs(spec);
  write_dataset(dataset, out_path);
  std::printf("wrote %zu graphs to %s\n", dataset.size(), out_path.c_str());
  return 0;
}

inline int run_augment(const std::string& in_path, const std::string& out_path,
                       AugmentMethod method, double ratio, const std::string& explainer,
                       int explainer_size, std::uint64_t seed) {
  const auto dataset = read_dataset(in_path);
  Rng rng(seed);
  std::vector<LabeledExample> augmented;
  augmented.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LabeledExample& ex = dataset[i];
    ExplanationMask mask;
    if (explainer == "ground-truth") {
      mask = GroundTruthExplainer(ex.explanation).explain(ex.graph);
    } else if (explainer == "random") {
      mask = RandomExplainer(std::min(explainer_size, ex.graph.num_edges()), seed).explain(ex.graph);
    } else if (explainer != "none") {
      raise(errc::invalid_parameters, "unknown explainer '" + explainer + "'");
    }
    Rng item_rng = rng.derive(i);
    Augmented out = [&] {
      if (method == AugmentMethod::mixup) {
        // donor drawn uniformly from the rest of the dataset
        const std::size_t j = dataset.size() == 1
                                  ? i
                                  : (i + 1 + static_cast<std::size_t>(item_rng.uniform_int(
                                                 static_cast<int>(dataset.size() - 1)))) %
                                        dataset.size();
        return epa_mixup(ex.graph, mask, dataset[j].graph, dataset[j].explanation, item_rng);
      }
      return apply_augmentation(ex.graph, mask, method, ratio, item_rng);
    }();
    // remap surviving mask edges onto the augmented graph
    std::vector<int> old_of_new(ex.graph.num_nodes(), -1);
    for (std::size_t n = 0; n < out.node_map.size(); ++n)
      old_of_new[static_cast<std::size_t>(out.node_map[n])] = static_cast<int>(n);
    std::vector<int> new_mask;
    for (int id : mask.edge_ids()) {
      const Edge& e = ex.graph.edges()[static_cast<std::size_t>(id)];
      const int nu = old_of_new[static_cast<std::size_t>(e.u)], nv = old_of_new[static_cast<std::size_t>(e.v)];
      if (nu >= 0 && nv >= 0) {
        const int nid = out.graph.edge_index(nu, nv);
        if (nid >= 0) new_mask.push_back(nid);
      }
    }
    augmented.push_back(LabeledExample{std::move(out.graph), ExplanationMask(std::move(new_mask))});
  }
  write_dataset(augmented, out_path);
  std::printf("wrote %zu augmented graphs to %s\n", augmented.size(), out_path.c_str());
  return 0;
}

inline int run_omega(double p, double q, Channel channel) {
  const OmegaTable expected = expected_omega(p, q, channel);
  const OmegaTable brute = brute_force_omega(p, q, channel);
  print_omega("closed-form omega:", expected);
  print_omega("brute-force omega:", brute);
  std::printf("max abs difference: %.3e\n", expected.max_abs_difference(brute));
  return 0;
}

inline int run_ecl(const std::string& in_path, int kappa, double epsilon, double p,
                   Channel channel, std::uint64_t seed) {
  const auto dataset = read_dataset(in_path);
  if (dataset.empty()) raise(errc::empty_input, in_path + " holds no graphs");
  std::vector<Graph> items;
  items.reserve(dataset.size());
  for (const auto& ex : dataset) items.push_back(ex.graph);

  AugmentedTrainingSet pairs;
  Rng rng(seed);
  static const ExplanationMask no_exempt{};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ExplanationMask& exempt =
        channel == Channel::semantic_preserving ? dataset[i].explanation : no_exempt;
    Rng r = rng.derive(i);
    Graph a = iid_edge_drop(dataset[i].graph, exempt, p, r);
    Graph b = iid_edge_drop(dataset[i].graph, exempt, p, r);
    pairs.pairs.push_back(AugmentedPair{std::move(a), std::move(b), static_cast<int>(i)});
  }

  EclConfig cfg;
  cfg.kappa = kappa;
  cfg.epsilon = epsilon;
  const EclModel model = fit_ecl(items, std::move(pairs), cfg);
  const long long pi = partition_score(model.partition, items, model.pairs, model.config);
  std::printf("optimal partition (pi = %lld):\n", pi);
  for (std::size_t b = 0; b < model.partition.blocks.size(); ++b) {
    std::printf("  block %zu:", b);
    for (int i : model.partition.blocks[b]) std::printf(" %d", i);
    std::printf("\n");
  }
  return 0;
}

inline Embedding parse_embedding(const nlohmann::json& j, const char* key, std::size_t line_no) {
  if (!j.contains(key) || !j[key].is_array())
    raise(errc::parse_error, "line " + std::to_string(line_no) + ": missing array field '" + key + "'");
  Embedding e;
  for (const auto& x : j[key]) e.push_back(x.get<double>());
  return e;
}

inline int run_loss(const std::string& kind, const std::string& in_path, double temperature) {
  std::ifstream in(in_path);
  if (!in) raise(errc::io_error, "cannot open " + in_path + " for reading");
  std::string line;
  std::size_t line_no = 0;
  if (kind == "nt-xent") {
    std::vector<Embedding> z1, z2;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) raise(errc::parse_error, "line " + std::to_string(line_no) + ": invalid JSON");
      z1.push_back(parse_embedding(j, "z1", line_no));
      z2.push_back(parse_embedding(j, "z2", line_no));
    }
    if (z1.empty()) raise(errc::empty_input, in_path + " holds no embedding pairs");
    const NtXentResult r = nt_xent_loss(z1, z2, LossConfig{temperature});
    for (std::size_t i = 0; i < r.per_sample.size(); ++i)
      std::printf("sample %zu: %.12f\n", i, r.per_sample[i]);
    std::printf("mean: %.12f\n", r.mean);
    return 0;
  }
  if (kind == "simsiam") {
    double total = 0.0;
    std::size_t count = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) raise(errc::parse_error, "line " + std::to_string(line_no) + ": invalid JSON");
      const double loss = simsiam_loss(parse_embedding(j, "p1", line_no), parse_embedding(j, "p2", line_no),
                                       parse_embedding(j, "z1", line_no), parse_embedding(j, "z2", line_no));
      std::printf("sample %zu: %.12f\n", count, loss);
      total += loss;
      ++count;
    }
    if (count == 0) raise(errc::empty_input, in_path + " holds no embedding quadruples");
    std::printf("mean: %.12f\n", total / static_cast<double>(count));
    return 0;
  }
  raise(errc::invalid_parameters, "unknown loss '" + kind + "' (expected nt-xent or simsiam)");
}

inline int run_verify(const std::vector<double>& p_grid, double q, int n_unlabeled, int n_labeled,
                      int n_test, int trials, int base_nodes, std::uint64_t seed,
                      const std::string& out_path) {
  std::vector<ExperimentRow> rows;
  rows.reserve(p_grid.size() * 2 * static_cast<std::size_t>(trials));
  for (Channel channel : {Channel::semantic_agnostic, Channel::semantic_preserving}) {
    for (double p : p_grid) {
      TheoremConfig cfg;
      cfg.p = p;
      cfg.q = q;
      cfg.n_unlabeled = n_unlabeled;
      cfg.n_labeled = n_labeled;
      cfg.n_test = n_test;
      cfg.trials = trials;
      cfg.channel = channel;
      cfg.base_nodes = base_nodes;
      cfg.seed = Rng(seed).derive(static_cast<std::uint64_t>(p * 1e6) * 2 +
                                  (channel == Channel::semantic_preserving ? 1 : 0))
                     .seed();
      const TheoremResult result = run_theorem1_mc(cfg);
      for (std::size_t t = 0; t < result.trials.size(); ++t) {
        const TrialOutcome& trial = result.trials[t];
        rows.push_back(ExperimentRow{channel_name(channel), p, q, n_unlabeled, n_labeled,
                                     static_cast<int>(t),
                                     "P" + std::to_string(trial.selected_partition),
                                     trial.error_rate, trial.seed});
      }
      std::printf("%s p=%.3f: mean error %.4f (stddev %.4f)\n", channel_name(channel), p,
                  result.mean_error, result.stddev_error);
    }
  }
  write_experiment_csv(rows, out_path);
  std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
  return 0;
}

}  // namespace detail

/// Entry point behind main(). Exit codes: 0 success, 1 usage error, 2 data
/// or I/O error. A global --seed flag and the SEED environment variable fix
/// all randomness; the flag wins.
inline int cli_dispatch(std::vector<std::string> args) {
  CLI::App app{"explanation-preserving graph augmentation toolkit"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "global RNG seed (beats the SEED environment variable)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a BA-2motifs dataset");
  DatasetSpec spec;
  std::string gen_variant = "modified", gen_out;
  gen->add_option("--n", spec.n_graphs, "number of graphs")->required();
  gen->add_option("--q", spec.q, "cycle-motif probability for label 1");
  gen->add_option("--base-nodes", spec.base_nodes, "BA base size");
  gen->add_option("--variant", gen_variant, "modified | original")
      ->check(CLI::IsMember({"modified", "original"}));
  gen->add_option("--out", gen_out, "output JSONL path")->required();

  // augment
  auto* aug = app.add_subcommand("augment", "apply an augmentation to a dataset file");
  std::string aug_in, aug_out, aug_method = "edge-drop", aug_explainer = "ground-truth";
  double aug_ratio = 0.1;
  int aug_explainer_size = 6;
  aug->add_option("--in", aug_in, "input JSONL path")->required();
  aug->add_option("--out", aug_out, "output JSONL path")->required();
  aug->add_option("--method", aug_method, "node-drop | edge-drop | attr-mask | subgraph | mixup")
      ->check(CLI::IsMember({"node-drop", "edge-drop", "attr-mask", "subgraph", "mixup"}));
  aug->add_option("--ratio", aug_ratio, "perturbation probability p");
  aug->add_option("--explainer", aug_explainer, "ground-truth | random | none")
      ->check(CLI::IsMember({"ground-truth", "random", "none"}));
  aug->add_option("--explainer-size", aug_explainer_size, "edge count for the random explainer");

  // omega
  auto* omega = app.add_subcommand("omega", "print closed-form vs brute-force omega tables");
  double om_p = 0.4, om_q = 0.5;
  std::string om_channel = "sa";
  omega->add_option("--p", om_p, "edge-drop probability");
  omega->add_option("--q", om_q, "cycle-motif probability");
  omega->add_option("--channel", om_channel, "sa | sp");

  // ecl
  auto* ecl = app.add_subcommand("ecl", "fit the exhaustive learner on a small dataset");
  std::string ecl_in, ecl_channel = "sa";
  int ecl_kappa = 2;
  double ecl_epsilon = 0.5, ecl_p = 0.4;
  ecl->add_option("--in", ecl_in, "input JSONL path (at most 13 graphs)")->required();
  ecl->add_option("--kappa", ecl_kappa, "maximum number of blocks");
  ecl->add_option("--epsilon", ecl_epsilon, "score threshold");
  ecl->add_option("--p", ecl_p, "edge-drop probability for the augmentation pairs");
  ecl->add_option("--channel", ecl_channel, "sa | sp (sp exempts stored explanation masks)");

  // loss
  auto* loss = app.add_subcommand("loss", "evaluate a loss on an embeddings file");
  std::string loss_kind = "nt-xent", loss_in;
  double loss_temperature = 0.2;
  loss->add_option("--loss", loss_kind, "nt-xent | simsiam")
      ->check(CLI::IsMember({"nt-xent", "simsiam"}));
  loss->add_option("--in", loss_in, "JSONL embeddings path")->required();
  loss->add_option("--temperature", loss_temperature, "NT-Xent temperature");

  // verify-theorem1
  auto* verify = app.add_subcommand("verify-theorem1", "Monte Carlo sweep of the error separation");
  std::string v_grid = "0.35:0.9:0.05", v_out;
  double v_q = 0.5;
  int v_n = 2000, v_labeled = 50, v_test = 2000, v_trials = 20, v_base = 20;
  verify->add_option("--p-grid", v_grid, "start:stop:step or comma list");
  verify->add_option("--q", v_q, "cycle-motif probability");
  verify->add_option("--n", v_n, "unlabeled training-set size");
  verify->add_option("--n-labeled", v_labeled, "labeled set size");
  verify->add_option("--n-test", v_test, "test set size");
  verify->add_option("--trials", v_trials, "Monte Carlo trials per grid point");
  verify->add_option("--base-nodes", v_base, "BA base size");
  verify->add_option("--out", v_out, "output CSV path")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "render an error-curve SVG from a sweep CSV");
  std::string plot_in, plot_out;
  plot->add_option("--in", plot_in, "input CSV path")->required();
  plot->add_option("--out", plot_out, "output SVG path")->required();

  std::vector<const char*> argv;
  argv.push_back("epag");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const std::uint64_t seed = detail::resolve_seed(seed_flag);
    if (gen->parsed()) {
      spec.seed = seed;
      spec.variant = gen_variant == "modified" ? DatasetSpec::Variant::modified
                                               : DatasetSpec::Variant::original;
      return detail::run_gen(spec, gen_out);
    }
    if (aug->parsed())
      return detail::run_augment(aug_in, aug_out, detail::parse_method(aug_method), aug_ratio,
                                 aug_explainer, aug_explainer_size, seed);
    if (omega->parsed()) return detail::run_omega(om_p, om_q, detail::parse_channel(om_channel));
    if (ecl->parsed())
      return detail::run_ecl(ecl_in, ecl_kappa, ecl_epsilon, ecl_p,
                             detail::parse_channel(ecl_channel), seed);
    if (loss->parsed()) return detail::run_loss(loss_kind, loss_in, loss_temperature);
    if (verify->parsed())
      return detail::run_verify(detail::parse_p_grid(v_grid), v_q, v_n, v_labeled, v_test,
                                v_trials, v_base, seed, v_out);
    if (plot->parsed()) {
      plot_error_curves(plot_in, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace epag::cli
