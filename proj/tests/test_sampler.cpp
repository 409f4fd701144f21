#include <doctest.h>

#include <algorithm>
#include <set>

#include "deepgraph/sampler.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace deepgraph;

TEST_SUITE("sampler") {
  TEST_CASE("empty set gives an empty sample") {
    Rng rng(0);
    SubstructureSet set;
    CHECK(sample_substructures(set, 5, SamplerParams::defaults_for(5), rng).empty());
  }

  TEST_CASE("a single covering item is returned alone") {
    const Graph c5 = oracle::cycle_graph(5);
    Adjacency adj(c5);
    SubstructureSet set;
    set.add(make_induced(adj, {0, 1, 2, 3, 4}, SubKind::cycle));
    SamplerParams p;
    p.n_init = 1;
    p.m_max = 5;
    Rng rng(2);
    CHECK(sample_substructures(set, 5, p, rng) == std::vector<int>{0});
  }

  TEST_CASE("default schedule and parameter checks") {
    const auto p = SamplerParams::defaults_for(20);
    CHECK(p.n_init == 5);
    CHECK(p.n_sample == 3);
    CHECK(p.top_k == 6);
    CHECK(p.m_max == 20);
    CHECK_FALSE(p.check().has_value());
    const auto tiny = SamplerParams::defaults_for(1, 0);
    CHECK(tiny.thre == 1);
    CHECK(tiny.n_init == 1);
    CHECK_FALSE(tiny.check().has_value());

    SamplerParams bad = p;
    bad.n_sample = 7;
    CHECK(bad.check().has_value());
    bad = p;
    bad.m_max = 4;
    CHECK(bad.check().has_value());
    bad = p;
    bad.thre = 0;
    CHECK(bad.check().has_value());
  }

  TEST_CASE("zero-gain items are never drawn while covering items remain") {
    // nodes 0..3 are covered by the first item; the rest only by the last one
    const Graph g = oracle::path_graph(8);
    Adjacency adj(g);
    SubstructureSet set;
    set.add(make_induced(adj, {0, 1, 2, 3}, SubKind::path));
    set.add(make_induced(adj, {1, 2, 3}, SubKind::khop, 2));
    set.add(make_induced(adj, {0, 1, 2}, SubKind::khop, 1));
    set.add(make_induced(adj, {4, 5, 6, 7}, SubKind::rwalk, 5));
    SamplerParams p;
    p.n_init = 1;
    p.top_k = 3;
    p.n_sample = 1;
    p.m_max = 8;
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng rng = split_rng(s, {});
      const auto out = sample_substructures(set, 8, p, rng);
      REQUIRE(!out.empty());
      // after the initial draw every pick must reduce the uncovered count
      std::vector<int> cover(8, 0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        int gain = 0;
        for (int v : set.items[out[i]].nodes) gain += cover[v] == 0 ? 1 : 0;
        if (i >= 1) CHECK(gain > 0);
        for (int v : set.items[out[i]].nodes) ++cover[v];
      }
      CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c >= 1; }));
    }
  }

  TEST_CASE("same seed, same sample") {
    Rng g_rng(5);
    const Graph g = oracle::random_graph(14, 0.3, g_rng);
    Rng ex(1);
    const auto set = extract_all(g, VocabConfig::geometric(), ex);
    const auto p = SamplerParams::defaults_for(14);
    Rng a(77), b(77);
    CHECK(sample_substructures(set, 14, p, a) == sample_substructures(set, 14, p, b));
  }

  TEST_CASE("coverage property on random graphs") {
    const auto r = props::sampler_coverage(150, 17);
    INFO(r.detail);
    CHECK(r.ok);
  }
}
