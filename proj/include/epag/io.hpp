#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "epag/error.hpp"
#include "epag/synth.hpp"

namespace epag {

// ---------------------------------------------------------------------------
// JSON-lines dataset format. One GraphRecord object per line:
//   {"id": str, "num_nodes": int, "edges": [[u,v],...],
//    "features": [[...],...]?, "label": int?, "explanation_edges": [int,...]?}
// ---------------------------------------------------------------------------

namespace detail {

inline LabeledExample parse_record(const nlohmann::json& j, std::size_t line_no) {
  auto fail = [&](const std::string& msg) {
    raise(errc::parse_error, "line " + std::to_string(line_no) + ": " + msg);
  };
  if (!j.is_object()) fail("expected a JSON object");
  if (!j.contains("num_nodes") || !j["num_nodes"].is_number_integer()) fail("missing integer field 'num_nodes'");
  if (!j.contains("edges") || !j["edges"].is_array()) fail("missing array field 'edges'");

  const int num_nodes = j["num_nodes"].get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      fail("each edge must be a [u,v] integer pair");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  std::optional<FeatureMatrix> features;
  if (j.contains("features") && !j["features"].is_null()) {
    if (!j["features"].is_array()) fail("'features' must be an array of per-node rows");
    FeatureMatrix f;
    for (const auto& row : j["features"]) {
      if (!row.is_array()) fail("'features' rows must be arrays");
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number()) fail("'features' entries must be numbers");
        r.push_back(x.get<double>());
      }
      f.push_back(std::move(r));
    }
    features = std::move(f);
  }
  std::optional<int> label;
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number_integer()) fail("'label' must be an integer");
    label = j["label"].get<int>();
  }

  Graph g = [&] {
    try {
      return Graph(num_nodes, std::move(edges), std::move(features), label);
    } catch (const Error& err) {
      throw Error(err.code(), "line " + std::to_string(line_no) + ": " + err.what());
    }
  }();

  ExplanationMask mask;
  if (j.contains("explanation_edges") && !j["explanation_edges"].is_null()) {
    if (!j["explanation_edges"].is_array()) fail("'explanation_edges' must be an integer array");
    std::vector<int> ids;
    for (const auto& x : j["explanation_edges"]) {
      if (!x.is_number_integer()) fail("'explanation_edges' entries must be integers");
      ids.push_back(x.get<int>());
    }
    for (int id : ids)
      if (id < 0 || id >= g.num_edges())
        fail("explanation edge index " + std::to_string(id) + " out of range (graph has " +
             std::to_string(g.num_edges()) + " edges)");
    mask = ExplanationMask(std::move(ids));
  }
  return LabeledExample{std::move(g), std::move(mask)};
}

}  // namespace detail

inline std::vector<LabeledExample> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open " + path + " for reading");
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      raise(errc::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(detail::parse_record(j, line_no));
  }
  return out;
}

inline void write_dataset(std::span<const LabeledExample> examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(errc::io_error, "cannot open " + path + " for writing");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const LabeledExample& ex = examples[i];
    nlohmann::ordered_json j;
    j["id"] = "g" + std::to_string(i);
    j["num_nodes"] = ex.graph.num_nodes();
    auto edges = nlohmann::ordered_json::array();
    for (const Edge& e : ex.graph.edges()) edges.push_back({e.u, e.v});
    j["edges"] = std::move(edges);
    if (ex.graph.features()) j["features"] = *ex.graph.features();
    if (ex.graph.label()) j["label"] = *ex.graph.label();
    if (!ex.explanation.empty()) j["explanation_edges"] = ex.explanation.edge_ids();
    out << j.dump() << '\n';
  }
  if (!out) raise(errc::io_error, "failed while writing " + path);
}

// ---------------------------------------------------------------------------
// Experiment CSV: one row per (channel, p, trial).
// ---------------------------------------------------------------------------

struct ExperimentRow {
  std::string channel;  // "sa" | "sp"
  double p = 0.0;
  double q = 0.0;
  int n_unlabeled = 0;
  int n_labeled = 0;
  int trial = 0;
  std::string selected_partition;  // "P1".."P4"
  double error_rate = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_sig6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace detail

inline constexpr const char* kExperimentCsvHeader =
    "channel,p,q,n_unlabeled,n_labeled,trial,selected_partition,error_rate,seed";

inline void write_experiment_csv(std::span<const ExperimentRow> rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(errc::io_error, "cannot open " + path + " for writing");
  out << kExperimentCsvHeader << '\n';
  for (const ExperimentRow& r : rows) {
    out << r.channel << ',' << detail::format_double(r.p) << ',' << detail::format_double(r.q)
        << ',' << r.n_unlabeled << ',' << r.n_labeled << ',' << r.trial << ','
        << r.selected_partition << ',' << detail::format_double(r.error_rate) << ',' << r.seed
        << '\n';
  }
  if (!out) raise(errc::io_error, "failed while writing " + path);
}

inline std::vector<ExperimentRow> read_experiment_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(in, line)) raise(errc::parse_error, path + ": missing CSV header");
  if (line != kExperimentCsvHeader)
    raise(errc::parse_error, path + ": unexpected CSV header '" + line + "'");
  std::vector<ExperimentRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9)
      raise(errc::parse_error,
            path + " line " + std::to_string(line_no) + ": expected 9 fields, got " +
                std::to_string(fields.size()));
    try {
      ExperimentRow r;
      r.channel = fields[0];
      r.p = std::stod(fields[1]);
      r.q = std::stod(fields[2]);
      r.n_unlabeled = std::stoi(fields[3]);
      r.n_labeled = std::stoi(fields[4]);
      r.trial = std::stoi(fields[5]);
      r.selected_partition = fields[6];
      r.error_rate = std::stod(fields[7]);
      r.seed = std::stoull(fields[8]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      raise(errc::parse_error, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SVG chart: mean error vs p, one series per channel, horizontal reference
// at q/2. Self-contained vector output, no plotting dependency; the series
// values are embedded as data-points attributes ("p:error,...", 6 significant
// digits) so downstream tooling can re-read them.
// ---------------------------------------------------------------------------

inline void plot_error_curves(const std::string& csv_path, const std::string& svg_path) {
  const std::vector<ExperimentRow> rows = read_experiment_csv(csv_path);
  if (rows.empty()) raise(errc::empty_input, csv_path + " has no data rows to plot");

  // mean error per (channel, p)
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (const ExperimentRow& r : rows) {
    auto& cell = acc[r.channel][r.p];
    cell.first += r.error_rate;
    cell.second += 1;
  }
  const double q = rows.front().q;

  const double width = 640, height = 420;
  const double ml = 62, mr = 18, mt = 22, mb = 46;
  const double pw = width - ml - mr, ph = height - mt - mb;
  double pmin = rows.front().p, pmax = rows.front().p;
  for (const ExperimentRow& r : rows) {
    pmin = std::min(pmin, r.p);
    pmax = std::max(pmax, r.p);
  }
  if (pmax == pmin) {
    pmin -= 0.05;
    pmax += 0.05;
  }
  const double emax = 0.5;  // error axis is [0, 0.5]
  auto xpos = [&](double p) { return ml + (p - pmin) / (pmax - pmin) * pw; };
  auto ypos = [&](double e) { return mt + (1.0 - e / emax) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double e = emax * i / 5.0;
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << ypos(e) << "\" x2=\"" << ml << "\" y2=\""
        << ypos(e) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << ypos(e) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << detail::format_sig6(e) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double p = pmin + (pmax - pmin) * i / 5.0;
    svg << "<line x1=\"" << xpos(p) << "\" y1=\"" << mt + ph << "\" x2=\"" << xpos(p) << "\" y2=\""
        << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << xpos(p) << "\" y=\"" << mt + ph + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << detail::format_sig6(p) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">edge-drop probability p</text>\n";
  svg << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2
      << ")\">mean error rate</text>\n";

  // reference line at q/2
  svg << "<line x1=\"" << ml << "\" y1=\"" << ypos(q / 2) << "\" x2=\"" << ml + pw << "\" y2=\""
      << ypos(q / 2) << "\" stroke=\"gray\" stroke-dasharray=\"5,4\" data-reference=\"q-half\" data-value=\""
      << detail::format_sig6(q / 2) << "\"/>\n";
  svg << "<text x=\"" << ml + pw - 4 << "\" y=\"" << ypos(q / 2) - 5
      << "\" font-size=\"11\" text-anchor=\"end\" fill=\"gray\">q/2 = " << detail::format_sig6(q / 2)
      << "</text>\n";

  const std::pair<std::string, std::string> series_colors[] = {{"sa", "#c0392b"}, {"sp", "#2471a3"}};
  double legend_y = mt + 14;
  for (const auto& [channel, color] : series_colors) {
    auto it = acc.find(channel);
    if (it == acc.end()) continue;
    std::ostringstream points, data;
    bool first = true;
    for (const auto& [p, cell] : it->second) {
      const double mean = cell.first / cell.second;
      points << (first ? "" : " ") << detail::format_sig6(xpos(p)) << ","
             << detail::format_sig6(ypos(mean));
      data << (first ? "" : ",") << detail::format_sig6(p) << ":" << detail::format_sig6(mean);
      first = false;
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\""
        << points.str() << "\" data-channel=\"" << channel << "\" data-points=\"" << data.str()
        << "\"/>\n";
    for (const auto& [p, cell] : it->second) {
      svg << "<circle cx=\"" << detail::format_sig6(xpos(p)) << "\" cy=\""
          << detail::format_sig6(ypos(cell.first / cell.second)) << "\" r=\"2.4\" fill=\"" << color
          << "\"/>\n";
    }
    svg << "<rect x=\"" << ml + 10 << "\" y=\"" << legend_y - 9 << "\" width=\"14\" height=\"4\" fill=\""
        << color << "\"/>\n";
    svg << "<text x=\"" << ml + 30 << "\" y=\"" << legend_y - 3 << "\" font-size=\"11\">"
        << (channel == "sa" ? "semantic-agnostic" : "semantic-preserving") << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";

  std::ofstream out(svg_path);
  if (!out) raise(errc::io_error, "cannot open " + svg_path + " for writing");
  out << svg.str();
  if (!out) raise(errc::io_error, "failed while writing " + svg_path);
}

}  // namespace epag
