#include "deepgraph/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deepgraph/substructure.hpp"

namespace deepgraph {

int count_induced_cycles(const Graph& g) { return static_cast<int>(enumerate_cycles(g, 3, 8).size()); }

std::vector<Graph> gen_cycle_regression(int n_graphs, int nodes_min, int nodes_max, double edge_prob, Rng& rng) {
  if (nodes_min < 4 || nodes_max > 24 || nodes_min > nodes_max) {
    throw std::invalid_argument("node range must lie within [4, 24]");
  }
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge_prob must be in [0, 1]");
  std::uniform_int_distribution<int> size_dist(nodes_min, nodes_max);
  std::bernoulli_distribution coin(edge_prob);
  std::vector<Graph> graphs(n_graphs);
  std::vector<double> raw(n_graphs);
  for (int k = 0; k < n_graphs; ++k) {
    Graph& g = graphs[k];
    g.num_nodes = size_dist(rng);
    std::vector<int> degree(g.num_nodes, 0);
    for (int u = 0; u < g.num_nodes; ++u) {
      for (int v = u + 1; v < g.num_nodes; ++v) {
        if (coin(rng)) {
          g.edges.push_back({u, v});
          ++degree[u];
          ++degree[v];
        }
      }
    }
    g.edge_feat.assign(g.edges.size(), 0);
    g.node_feat.resize(g.num_nodes);
    for (int v = 0; v < g.num_nodes; ++v) g.node_feat[v] = std::min(degree[v], 7);
    raw[k] = count_induced_cycles(g);
  }
  if (n_graphs == 0) return graphs;
  double mean = 0.0;
  for (double r : raw) mean += r;
  mean /= n_graphs;
  double var = 0.0;
  for (double r : raw) var += (r - mean) * (r - mean);
  var /= n_graphs;
  const double sd = std::sqrt(var);
  for (int k = 0; k < n_graphs; ++k) graphs[k].target = sd > 0.0 ? (raw[k] - mean) / sd : 0.0;
  return graphs;
}

std::vector<Graph> gen_community_nodes(int n_graphs, int nodes_per_block, double p_in, double p_out, Rng& rng,
                                       double reveal_frac) {
  if (nodes_per_block < 1) throw std::invalid_argument("nodes_per_block must be positive");
  if (!(p_in > p_out) || p_out < 0.0 || p_in > 1.0) throw std::invalid_argument("need 0 <= p_out < p_in <= 1");
  if (!(reveal_frac >= 0.0 && reveal_frac <= 1.0)) throw std::invalid_argument("reveal_frac must be in [0, 1]");
  std::bernoulli_distribution in_coin(p_in);
  std::bernoulli_distribution out_coin(p_out);
  std::bernoulli_distribution reveal(reveal_frac);
  std::vector<Graph> graphs(n_graphs);
  for (auto& g : graphs) {
    g.num_nodes = 2 * nodes_per_block;
    g.node_labels.resize(g.num_nodes);
    for (int v = 0; v < g.num_nodes; ++v) g.node_labels[v] = v < nodes_per_block ? 0 : 1;
    for (int u = 0; u < g.num_nodes; ++u) {
      for (int v = u + 1; v < g.num_nodes; ++v) {
        const bool same = g.node_labels[u] == g.node_labels[v];
        if (same ? in_coin(rng) : out_coin(rng)) g.edges.push_back({u, v});
      }
    }
    g.edge_feat.assign(g.edges.size(), 0);
    g.node_feat.resize(g.num_nodes);
    for (int v = 0; v < g.num_nodes; ++v) g.node_feat[v] = reveal(rng) ? g.node_labels[v] + 1 : 0;
  }
  return graphs;
}

}  // namespace deepgraph
