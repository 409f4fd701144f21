#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "deepgraph/canonical.hpp"
#include "deepgraph/capacity.hpp"
#include "deepgraph/sampler.hpp"
#include "deepgraph/substructure.hpp"
#include "deepgraph/training.hpp"
#include "oracles.hpp"

namespace props {

using namespace deepgraph;

namespace {

std::string graph_text(const Graph& g) {
  std::ostringstream s;
  s << "n=" << g.num_nodes << " edges={";
  for (const auto& e : g.edges) s << "(" << e.u << "," << e.v << ")";
  s << "}";
  return s.str();
}

bool induced_adjacency_ok(const Graph& g, const Substructure& s) {
  Adjacency adj(g);
  for (int a = 0; a < s.size(); ++a) {
    for (int b = 0; b < s.size(); ++b) {
      const bool want = a != b && adj.connected(s.nodes[a], s.nodes[b]);
      if (s.edge(a, b) != want) return false;
    }
  }
  return true;
}

template <class Key>
bool same_sets(const std::set<Key>& a, const std::set<Key>& b) {
  return a == b;
}

}  // namespace

Outcome enumeration_matches_oracle(int graphs, int max_nodes, std::uint64_t seed) {
  Outcome out;
  struct Ranges {
    int cmin, cmax, lmin, lmax, pmin, pmax;
  };
  const Ranges ranges[] = {{3, 8, 2, 6, 4, 8}, {3, 9, 2, 8, 2, 9}};
  for (int t = 0; t < graphs; ++t) {
    Rng rng = split_rng(seed, {static_cast<std::uint64_t>(t)});
    const int n = std::uniform_int_distribution<int>(1, max_nodes)(rng);
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const Graph g = oracle::random_graph(n, p, rng);
    for (const auto& r : ranges) {
      std::set<oracle::NodeSet> cyc;
      for (const auto& s : enumerate_cycles(g, r.cmin, r.cmax)) {
        if (s.kind != SubKind::cycle || !induced_adjacency_ok(g, s) || !cyc.insert(s.nodes).second) {
          out.fail("malformed or duplicate cycle item on " + graph_text(g));
        }
      }
      if (!same_sets(cyc, oracle::brute_cycles(g, r.cmin, r.cmax))) out.fail("cycle sets differ on " + graph_text(g));

      std::set<std::pair<oracle::NodeSet, int>> stars;
      for (const auto& s : enumerate_stars(g, r.lmin, r.lmax)) {
        if (s.kind != SubKind::star || !induced_adjacency_ok(g, s) || !stars.insert({s.nodes, s.center}).second) {
          out.fail("malformed or duplicate star item on " + graph_text(g));
        }
      }
      if (!same_sets(stars, oracle::brute_stars(g, r.lmin, r.lmax))) out.fail("star sets differ on " + graph_text(g));

      std::set<oracle::NodeSet> paths;
      for (const auto& s : enumerate_paths(g, r.pmin, r.pmax)) {
        if (s.kind != SubKind::path || !induced_adjacency_ok(g, s) || !paths.insert(s.nodes).second) {
          out.fail("malformed or duplicate path item on " + graph_text(g));
        }
      }
      if (!same_sets(paths, oracle::brute_paths(g, r.pmin, r.pmax))) out.fail("path sets differ on " + graph_text(g));
      out.checked += static_cast<long>(cyc.size() + stars.size() + paths.size());
    }
  }
  if (out.ok) out.detail = std::to_string(graphs) + " graphs, " + std::to_string(out.checked) + " items";
  return out;
}

Outcome capacity_matches_oracle(int trials, int max_n, int max_m, double tol, std::uint64_t seed, double* max_diff) {
  Outcome out;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = split_rng(seed, {static_cast<std::uint64_t>(t)});
    const int n = std::uniform_int_distribution<int>(1, max_n)(rng);
    const int m = std::uniform_int_distribution<int>(1, max_m)(rng);
    const int d = std::uniform_int_distribution<int>(1, 4)(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix h(n, d), w(d, d);
    for (int i = 0; i < n * d; ++i) h.data()[i] = normal(rng);
    for (int i = 0; i < d * d; ++i) w.data()[i] = normal(rng);
    std::vector<std::vector<int>> members(m);
    for (auto& s : members) {
      while (s.empty()) {
        for (int v = 0; v < n; ++v)
          if (std::bernoulli_distribution(0.5)(rng)) s.push_back(v);
      }
    }
    const Matrix e = pattern_basis(n, members);
    const double closed = attention_capacity(h, e, w);
    const double brute = oracle::brute_capacity(h, e, w);
    const double diff = std::abs(closed - brute);
    worst = std::max(worst, diff);
    if (!(diff <= tol)) {
      std::ostringstream s;
      s << "trial " << t << ": closed " << closed << " vs brute " << brute;
      out.fail(s.str());
    }
    ++out.checked;
  }
  if (max_diff) *max_diff = worst;
  if (out.ok) {
    std::ostringstream s;
    s << trials << " instances, max |diff| " << worst;
    out.detail = s.str();
  }
  return out;
}

GradCheck gradient_check(const ModelConfig& cfg, int nodes, int subs, std::uint64_t seed, double step, double tol) {
  GradCheck res;
  Rng rng = split_rng(seed, {0x6A});
  Graph g;
  SubstructureSet set;
  for (int attempt = 0;; ++attempt) {
    g = oracle::random_graph(nodes, 0.5, rng);
    set = extract_all(g, VocabConfig::geometric(), rng);
    if (static_cast<int>(set.items.size()) >= subs) break;
    if (attempt > 1000) throw std::runtime_error("could not draw a graph with enough substructures");
  }
  for (auto& f : g.node_feat) f = static_cast<int>(uniform_index(rng, cfg.node_vocab));
  for (auto& f : g.edge_feat) f = static_cast<int>(uniform_index(rng, cfg.edge_vocab));
  std::vector<int> pick(set.items.size());
  std::iota(pick.begin(), pick.end(), 0);
  std::shuffle(pick.begin(), pick.end(), rng);
  std::vector<Substructure> chosen;
  for (int i = 0; i < subs; ++i) chosen.push_back(set.items[pick[i]]);

  const DistanceTable dist = all_pairs_distances(g);
  TokenOptions opts;
  opts.s_max = cfg.s_max;
  const TokenBatch batch = build_tokens(g, chosen, dist, rng, opts);
  ModelParams p = init_params(cfg, rng);

  if (cfg.task == Task::graph_regression) {
    g.target = model_forward(batch, p).value + 3.0;  // keeps the absolute error away from its kink
  } else {
    g.node_labels.resize(g.num_nodes);
    for (auto& y : g.node_labels) y = static_cast<int>(uniform_index(rng, cfg.num_classes));
  }

  ForwardTrace trace;
  model_forward(batch, p, &trace);
  const Gradients analytic = backward(trace, p, batch, g);
  auto pattern = [](const ForwardTrace& t) {
    std::vector<bool> on;
    for (const auto& lt : t.layers)
      for (Eigen::Index k = 0; k < lt.ffn_pre.size(); ++k) on.push_back(lt.ffn_pre.data()[k] > 0.0);
    return on;
  };
  const auto base = pattern(trace);
  auto eval = [&](bool& smooth) {
    ForwardTrace t;
    const double v = loss(model_forward(batch, p, &t), g, cfg.task);
    smooth = smooth && pattern(t) == base;
    return v;
  };

  auto params = p.tensors();
  auto grads = analytic.tensors();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].first == "embed.sub.random") continue;  // fixed buffer, not trained
    Matrix& x = *params[i].second;
    Matrix numeric(x.rows(), x.cols());
    Matrix ana = *grads[i].second;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double keep = x.data()[k];
      bool smooth = true;
      x.data()[k] = keep + step;
      const double up = eval(smooth);
      x.data()[k] = keep - step;
      const double down = eval(smooth);
      x.data()[k] = keep;
      ++res.entries;
      if (smooth) {
        numeric.data()[k] = (up - down) / (2.0 * step);
      } else {
        numeric.data()[k] = ana.data()[k] = 0.0;
        ++res.skipped;
      }
    }
    const double scale = std::max(ana.norm(), numeric.norm());
    const double diff = (ana - numeric).norm();
    const double rel = scale > 1e-10 ? diff / scale : diff;
    ++res.blocks;
    if (rel > res.worst_rel) {
      res.worst_rel = rel;
      res.worst_block = params[i].first;
    }
    if (!(rel <= tol)) res.ok = false;
  }
  if (res.skipped * 100 > res.entries) res.ok = false;
  return res;
}

Outcome attention_invariants(int graphs, std::uint64_t seed) {
  Outcome out;
  const double inf = std::numeric_limits<double>::infinity();
  for (int t = 0; t < graphs; ++t) {
    Rng rng = split_rng(seed, {static_cast<std::uint64_t>(t)});
    const int n = std::uniform_int_distribution<int>(3, 12)(rng);
    Graph g = oracle::random_graph(n, 0.35, rng);
    const auto set = extract_all(g, VocabConfig::geometric(), rng);
    std::vector<Substructure> chosen;
    for (int idx : sample_substructures(set, n, SamplerParams::defaults_for(n), rng)) chosen.push_back(set.items[idx]);

    ModelConfig cfg;
    cfg.num_layers = 3;
    cfg.heads = 2;
    cfg.d_model = 16;
    cfg.d_head = 8;
    cfg.d_ffn = 32;
    ModelParams p = init_params(cfg, rng);
    for (auto& lp : p.layers) {
      lp.wq *= 3.0;
      lp.wk *= 3.0;
    }
    for (bool local : {true, false}) {
      TokenOptions opts;
      opts.local_mask = local;
      const TokenBatch b = build_tokens(g, chosen, all_pairs_distances(g), rng, opts);
      const int m = b.m, tok = b.tokens();

      // mask layout from membership alone
      Matrix want = Matrix::Zero(tok, tok);
      if (local) {
        for (int s = 0; s < m; ++s) {
          want.row(n + s).setConstant(-inf);
          want.col(n + s).setConstant(-inf);
        }
        for (int s = 0; s < m; ++s) {
          for (int v : chosen[s].nodes) {
            want(n + s, v) = 0.0;
            want(v, n + s) = 0.0;
          }
        }
      }
      for (int i = 0; i < tok; ++i)
        for (int j = 0; j < tok; ++j)
          if (!(want(i, j) == b.mask(i, j))) out.fail("mask layout differs on " + graph_text(g));

      ForwardTrace tr;
      model_forward(b, p, &tr);
      for (const auto& lt : tr.layers) {
        for (const auto& a : lt.attn) {
          for (int i = 0; i < tok; ++i) {
            if (std::abs(a.row(i).sum() - 1.0) > 1e-6) out.fail("attention row does not sum to 1");
            for (int j = 0; j < tok; ++j) {
              const bool masked = std::isinf(b.mask(i, j));
              if (masked && a(i, j) != 0.0) out.fail("masked attention entry is not exactly 0");
              if (a(i, j) > 0.0 && b.mask(i, j) != 0.0) out.fail("positive attention on a masked pair");
              if (a(i, j) < 0.0) out.fail("negative attention");
            }
            ++out.checked;
          }
        }
      }
    }
  }
  if (out.ok) out.detail = std::to_string(out.checked) + " attention rows";
  return out;
}

Outcome sampler_coverage(int graphs, std::uint64_t seed) {
  Outcome out;
  for (int t = 0; t < graphs; ++t) {
    Rng rng = split_rng(seed, {static_cast<std::uint64_t>(t)});
    const int n = std::uniform_int_distribution<int>(2, 14)(rng);
    const Graph g = oracle::random_graph(n, std::uniform_real_distribution<double>(0.15, 0.7)(rng), rng);
    VocabConfig vocab = VocabConfig::geometric();
    vocab.khop = std::bernoulli_distribution(0.5)(rng);
    const auto set = extract_all(g, vocab, rng);
    for (int thre = 1; thre <= 3; ++thre) {
      for (bool unlimited : {false, true}) {
        SamplerParams p = SamplerParams::defaults_for(n, thre);
        if (unlimited) p.m_max = static_cast<int>(set.items.size()) + n + 1;
        const auto idx = sample_substructures(set, n, p, rng);
        ++out.checked;
        std::set<int> seen;
        std::vector<int> cover(n, 0);
        for (int i : idx) {
          if (i < 0 || i >= static_cast<int>(set.items.size())) out.fail("sampled index out of range");
          if (!seen.insert(i).second) out.fail("sampled index repeated");
          for (int v : set.items[i].nodes) ++cover[v];
        }
        if (static_cast<int>(idx.size()) > p.m_max) out.fail("sample exceeds m_max");
        if (set.empty() && !idx.empty()) out.fail("sample from an empty set");
        if (static_cast<int>(idx.size()) < p.m_max) {
          const bool covered = std::all_of(cover.begin(), cover.end(), [&](int c) { return c >= thre; });
          bool useful_left = false;
          for (int i = 0; i < static_cast<int>(set.items.size()); ++i) {
            if (seen.count(i)) continue;
            for (int v : set.items[i].nodes) useful_left = useful_left || cover[v] < thre;
          }
          if (!covered && useful_left) out.fail("sampler stopped early on " + graph_text(g));
        }
        if (unlimited && thre == 1) {
          std::vector<int> reach(n, 0);
          for (const auto& s : set.items)
            for (int v : s.nodes) reach[v] = 1;
          for (int v = 0; v < n; ++v)
            if (reach[v] && cover[v] < 1) out.fail("coverable node left uncovered on " + graph_text(g));
        }
      }
    }
  }
  if (out.ok) out.detail = std::to_string(out.checked) + " samples";
  return out;
}

namespace {

using Flat = std::vector<std::uint8_t>;

std::map<Flat, double> form_distribution(const std::vector<std::uint8_t>& adj, int n, Outcome& out) {
  std::map<Flat, double> dist;
  oracle::BranchEnumerator en;
  en.for_each_branch(
      [&](oracle::BranchEnumerator& ch) {
        const auto perm = dfs_order_with(std::span<const std::uint8_t>(adj), n, ch);
        std::vector<int> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < n; ++k)
          if (static_cast<int>(sorted.size()) != n || sorted[k] != k) out.fail("DFS order is not a permutation");
        Flat flat = flatten_permuted(adj, n, perm, n);
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b)
            if (flat[flat_index(a, b, n)] != adj[perm[a] * n + perm[b]]) out.fail("flattened form is not the permuted graph");
        return flat;
      },
      [&](const Flat& f, double prob) { dist[f] += prob; });
  return dist;
}

std::vector<std::uint8_t> relabel(const std::vector<std::uint8_t>& adj, int n, const std::vector<int>& sigma) {
  std::vector<std::uint8_t> out(adj.size(), 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out[sigma[a] * n + sigma[b]] = adj[a * n + b];
  return out;
}

bool same_distribution(const std::map<Flat, double>& a, const std::map<Flat, double>& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || std::abs(ia->second - ib->second) > 1e-12) return false;
  }
  return true;
}

}  // namespace

Outcome dfs_permutation_invariance(int max_nodes) {
  Outcome out;
  for (int n = 1; n <= max_nodes; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    // transpositions generate every relabelling; small sizes also try all permutations directly
    std::vector<std::vector<int>> sigmas;
    for (auto [a, b] : pairs) {
      std::vector<int> s(n);
      std::iota(s.begin(), s.end(), 0);
      std::swap(s[a], s[b]);
      sigmas.push_back(s);
    }
    if (n <= 4) {
      std::vector<int> s(n);
      std::iota(s.begin(), s.end(), 0);
      while (std::next_permutation(s.begin(), s.end())) sigmas.push_back(s);
    }
    for (unsigned mask = 0; mask < (1u << pairs.size()); ++mask) {
      std::vector<std::uint8_t> adj(n * n, 0);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (mask >> k & 1u) adj[pairs[k].first * n + pairs[k].second] = adj[pairs[k].second * n + pairs[k].first] = 1;
      }
      const auto base = form_distribution(adj, n, out);
      double total = 0.0;
      for (const auto& [f, pr] : base) total += pr;
      if (std::abs(total - 1.0) > 1e-12) out.fail("branch probabilities do not sum to 1");
      for (const auto& s : sigmas) {
        if (!same_distribution(base, form_distribution(relabel(adj, n, s), n, out))) {
          out.fail("distribution changes under relabelling, n=" + std::to_string(n) + " mask=" + std::to_string(mask));
        }
        ++out.checked;
      }
    }
  }
  if (out.ok) out.detail = std::to_string(out.checked) + " (graph, relabelling) pairs";
  return out;
}

}  // namespace props
