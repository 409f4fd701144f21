#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace deepgraph {

struct Edge {
  int u = 0;
  int v = 0;
};

/// Undirected graph with categorical node/edge features and an optional target.
/// A graph-level task stores a scalar in `target`; a node-level task stores one
/// class label per node in `node_labels`.
struct Graph {
  int num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<int> node_feat;
  std::vector<int> edge_feat;
  std::optional<double> target;
  std::vector<int> node_labels;
};

/// Returns a description of the first violated invariant, or nullopt when the
/// graph is well formed.
std::optional<std::string> validate(const Graph& g);

/// Neighbour lists plus a dense edge-index lookup. Built once per graph.
class Adjacency {
 public:
  explicit Adjacency(const Graph& g);

  int num_nodes() const { return n_; }
  const std::vector<int>& neighbors(int v) const { return nbrs_[v]; }
  int degree(int v) const { return static_cast<int>(nbrs_[v].size()); }
  bool connected(int u, int v) const { return edge_id_[u * n_ + v] >= 0; }
  /// Index into Graph::edges, or -1.
  int edge_index(int u, int v) const { return edge_id_[u * n_ + v]; }

 private:
  int n_ = 0;
  std::vector<std::vector<int>> nbrs_;  // sorted ascending
  std::vector<int> edge_id_;
};

/// Distance bucket used for unreachable pairs; shared with the attention bias table.
inline constexpr int kMaxDistBucket = 64;

/// All-pairs hop distances with one deterministic shortest path per ordered pair.
struct DistanceTable {
  int n = 0;
  std::vector<int> dis;                       // n*n, kMaxDistBucket when unreachable
  std::vector<std::uint8_t> reach;            // n*n
  std::vector<std::vector<int>> sp_edges;     // n*n, edge indices from i towards j

  int distance(int i, int j) const { return dis[i * n + j]; }
  bool reachable(int i, int j) const { return reach[i * n + j] != 0; }
  const std::vector<int>& path(int i, int j) const { return sp_edges[i * n + j]; }
};

/// BFS from every node. The predecessor of each node on the stored path is the
/// smallest-index neighbour one level closer to the source.
DistanceTable all_pairs_distances(const Graph& g);

// JSON Lines I/O. Keys: num_nodes, edges, node_feat, edge_feat, target.
nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);
std::vector<Graph> read_graphs_jsonl(const std::string& path);
void write_graphs_jsonl(const std::string& path, const std::vector<Graph>& graphs);
std::vector<Graph> parse_graphs_jsonl(std::istream& in);

}  // namespace deepgraph
