#include <catch2/catch_amalgamated.hpp>

#include "epag/graph.hpp"
#include "epag/synth.hpp"
#include "oracles.hpp"

using namespace epag;

static Graph house() { return motif(MotifKind::house); }
static Graph cycle5() { return motif(MotifKind::cycle); }

TEST_CASE("validate_graph canonicalizes and rejects bad input", "[graph]") {
  SECTION("duplicate after canonicalization") {
    try {
      validate_graph(3, {{1, 0}, {0, 1}, {1, 2}});
      FAIL("expected duplicate_edge");
    } catch (const Error& e) {
      CHECK(e.code() == errc::duplicate_edge);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("(0,1)"));
    }
  }
  SECTION("self loop") {
    try {
      validate_graph(2, {{0, 0}});
      FAIL("expected self_loop");
    } catch (const Error& e) {
      CHECK(e.code() == errc::self_loop);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("edge 0"));
    }
  }
  SECTION("node index out of range") {
    try {
      validate_graph(2, {{0, 2}});
      FAIL("expected index_out_of_range");
    } catch (const Error& e) {
      CHECK(e.code() == errc::index_out_of_range);
    }
  }
  SECTION("feature shape") {
    try {
      validate_graph(2, {{0, 1}}, FeatureMatrix{{1.0}});
      FAIL("expected feature_shape_mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == errc::feature_shape_mismatch);
    }
    try {
      validate_graph(2, {{0, 1}}, FeatureMatrix{{1.0}, {1.0, 2.0}});
      FAIL("expected feature_shape_mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == errc::feature_shape_mismatch);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("row 1"));
    }
  }
  SECTION("house motif has 6 edges") { CHECK(house().num_edges() == 6); }
  SECTION("edge ordering is canonical regardless of input order") {
    const Graph a(4, {{3, 2}, {1, 0}, {2, 0}});
    const Graph b(4, {{0, 1}, {0, 2}, {2, 3}});
    CHECK(a == b);
    CHECK(a.edge_index(2, 0) == 1);
    CHECK(a.edge_index(1, 3) == -1);
  }
}

TEST_CASE("count_simple_cycles on the pinned fixtures", "[graph][cycles]") {
  CHECK(count_simple_cycles(house()) == 3);
  CHECK(count_simple_cycles(cycle5()) == 1);

  SECTION("forests are acyclic") {
    Rng rng(5);
    CHECK(count_simple_cycles(ba_graph(30, 1, rng)) == 0);
    CHECK(count_simple_cycles(Graph(4, {})) == 0);
  }
  SECTION("house minus the shared square/roof edge leaves the pentagon") {
    const Graph h = house();
    std::vector<std::pair<int, int>> edges;
    for (const Edge& e : h.edges())
      if (!(e.u == 0 && e.v == 3)) edges.emplace_back(e.u, e.v);
    const Graph pruned(5, std::move(edges));
    CHECK(count_simple_cycles(pruned) == 1);
    CHECK(oracles::count_simple_cycles_bruteforce(pruned) == 1);
  }
  SECTION("guard rejects dense graphs") {
    // K9: 36 edges, 9 nodes, mu = 28 > 20
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < 9; ++u)
      for (int v = u + 1; v < 9; ++v) edges.emplace_back(u, v);
    try {
      count_simple_cycles(Graph(9, std::move(edges)));
      FAIL("expected too_many_cycles");
    } catch (const Error& e) {
      CHECK(e.code() == errc::too_many_cycles);
    }
  }
}

TEST_CASE("count_simple_cycles matches the edge-subset oracle", "[graph][cycles]") {
  Rng rng(99);
  for (int i = 0; i < 150; ++i) {
    const Graph g = oracles::random_graph(2 + rng.uniform_int(7), 12, rng);
    INFO("case " << i << ": " << g.num_nodes() << " nodes, " << g.num_edges() << " edges");
    REQUIRE(count_simple_cycles(g) == oracles::count_simple_cycles_bruteforce(g));
  }
}

TEST_CASE("cycle_distance", "[graph]") {
  CHECK(cycle_distance(cycle5(), house()) == 2);
  CHECK(cycle_distance(house(), house()) == 0);
  Rng rng(3);
  CHECK(cycle_distance(ba_graph(25, 1, rng), house()) == 3);

  SECTION("pseudometric on random triples") {
    Rng trng(17);
    for (int i = 0; i < 40; ++i) {
      const Graph a = oracles::random_graph(6, 9, trng);
      const Graph b = oracles::random_graph(6, 9, trng);
      const Graph c = oracles::random_graph(6, 9, trng);
      CHECK(cycle_distance(a, b) == cycle_distance(b, a));
      CHECK(cycle_distance(a, a) == 0);
      CHECK(cycle_distance(a, c) <= cycle_distance(a, b) + cycle_distance(b, c));
    }
  }
}

TEST_CASE("union_attach", "[graph]") {
  Rng rng(7);
  SECTION("BA tree of 20 plus house: 25 nodes, 26 edges, 3 cycles") {
    const Graph base = ba_graph(20, 1, rng);
    const Graph joined = union_attach(base, house(), rng);
    CHECK(joined.num_nodes() == 25);
    CHECK(joined.num_edges() == 26);
    CHECK(count_simple_cycles(joined) == 3);
  }
  SECTION("single node + single node") {
    const Graph a(1, {}), b(1, {});
    const Graph joined = union_attach(a, b, rng);
    CHECK(joined.num_nodes() == 2);
    CHECK(joined.num_edges() == 1);
    CHECK(count_simple_cycles(joined) == 0);
  }
  SECTION("BA tree + cycle motif has exactly one cycle") {
    const Graph joined = union_attach(ba_graph(12, 1, rng), cycle5(), rng);
    CHECK(count_simple_cycles(joined) == 1);
  }
  SECTION("empty operand rejected") {
    try {
      union_attach(Graph(0, {}), house(), rng);
      FAIL("expected empty_graph");
    } catch (const Error& e) {
      CHECK(e.code() == errc::empty_graph);
    }
  }
  SECTION("cycle-count additivity over random operands") {
    Rng prng(23);
    for (int i = 0; i < 30; ++i) {
      const Graph base = oracles::random_graph(5 + prng.uniform_int(4), 8, prng);
      const Graph extra = oracles::random_graph(4 + prng.uniform_int(3), 6, prng);
      if (base.num_nodes() == 0 || extra.num_nodes() == 0) continue;
      const Graph joined = union_attach(base, extra, prng);
      CHECK(count_simple_cycles(joined) ==
            count_simple_cycles(base) + count_simple_cycles(extra));
    }
  }
}
