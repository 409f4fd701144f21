#include <doctest.h>

#include <map>
#include <set>
#include <stdexcept>

#include "deepgraph/canonical.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace deepgraph;

namespace {

Substructure whole(const Graph& g, SubKind kind = SubKind::path) {
  Adjacency adj(g);
  std::vector<int> nodes(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) nodes[i] = i;
  return make_induced(adj, nodes, kind);
}

// every DFS order with its probability, by walking all chooser branches
std::map<std::vector<int>, double> order_distribution(const Substructure& s) {
  std::map<std::vector<int>, double> dist;
  oracle::BranchEnumerator en;
  en.for_each_branch([&](oracle::BranchEnumerator& c) { return dfs_order_with(std::span<const std::uint8_t>(s.adj), s.size(), c); },
                     [&](const std::vector<int>& order, double prob) { dist[order] += prob; });
  return dist;
}

}  // namespace

TEST_SUITE("canonical") {
  TEST_CASE("flat index walks the upper triangle") {
    int k = 0;
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) CHECK(flat_index(a, b, 6) == k++);
    CHECK(k == flat_length(6));
  }

  TEST_CASE("path P3 and a single edge flatten as expected") {
    Rng rng(0);
    const auto p3 = canonicalize(whole(oracle::path_graph(3)), rng, 4);
    CHECK(p3.size == 3);
    CHECK(p3.flat_adj == std::vector<std::uint8_t>{1, 0, 0, 1, 0, 0});
    const auto e = canonicalize(whole(oracle::path_graph(2)), rng, 4);
    CHECK(e.flat_adj == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0});
  }

  TEST_CASE("oversized substructures are rejected") {
    Rng rng(0);
    CHECK_THROWS_AS(canonicalize(whole(oracle::path_graph(5)), rng, 4), std::invalid_argument);
  }

  TEST_CASE("P3 starts at either end with equal probability") {
    const auto dist = order_distribution(whole(oracle::path_graph(3)));
    REQUIRE(dist.size() == 2);
    CHECK(dist.at({0, 1, 2}) == doctest::Approx(0.5));
    CHECK(dist.at({2, 1, 0}) == doctest::Approx(0.5));
  }

  TEST_CASE("triangle orders all flatten identically") {
    const auto tri = whole(oracle::cycle_graph(3), SubKind::cycle);
    const auto dist = order_distribution(tri);
    CHECK(dist.size() == 6);
    for (const auto& [order, prob] : dist) {
      CHECK(prob == doctest::Approx(1.0 / 6));
      CHECK(flatten_permuted(tri.adj, 3, order, 4) == std::vector<std::uint8_t>{1, 1, 0, 1, 0, 0});
    }
  }

  TEST_CASE("star starts at a leaf and visits the centre second") {
    const auto star = whole(oracle::star_graph(3), SubKind::star);
    const auto dist = order_distribution(star);
    double total = 0.0;
    for (const auto& [order, prob] : dist) {
      CHECK(order[0] != 0);
      CHECK(order[1] == 0);
      total += prob;
    }
    CHECK(dist.size() == 6);
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("disconnected input restarts at a minimum-degree node") {
    // edge 0-1 plus isolated node 2: the isolated node has degree 0 and goes first
    const Graph g = oracle::make_graph(3, {{0, 1}});
    Adjacency adj(g);
    const auto s = make_induced(adj, {0, 1, 2}, SubKind::khop, 0);
    for (const auto& [order, prob] : order_distribution(s)) CHECK(order[0] == 2);
  }

  TEST_CASE("pooled forms") {
    Rng rng(8);
    const auto tri = whole(oracle::cycle_graph(3), SubKind::cycle);
    CHECK(canonicalize_pooled(tri, 1, rng).size() == 1);
    const auto forms = canonicalize_pooled(tri, 20, rng);
    for (const auto& f : forms) CHECK(f.flat_adj == forms[0].flat_adj);

    const auto p3 = canonicalize_pooled(whole(oracle::path_graph(3)), 100, rng, 4);
    std::set<int> starts;
    for (const auto& f : p3) {
      starts.insert(f.perm[0]);
      CHECK(f.flat_adj == p3[0].flat_adj);
    }
    CHECK(starts == std::set<int>{0, 2});
  }

  TEST_CASE("padding beyond the substructure stays zero") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      const Graph g = oracle::random_graph(7, 0.5, rng);
      const auto s = whole(g, SubKind::khop);
      const auto f = canonicalize(s, rng, 10);
      REQUIRE(static_cast<int>(f.flat_adj.size()) == flat_length(10));
      for (int a = 0; a < 10; ++a)
        for (int b = a + 1; b < 10; ++b) {
          const auto bit = f.flat_adj[flat_index(a, b, 10)];
          if (b >= 7) CHECK(bit == 0);
          else CHECK(bit == (s.edge(f.perm[a], f.perm[b]) ? 1 : 0));
        }
    }
  }

  TEST_CASE("output distribution is invariant under relabelling") {
    const auto r = props::dfs_permutation_invariance(4);
    INFO(r.detail);
    CHECK(r.ok);
  }
}
