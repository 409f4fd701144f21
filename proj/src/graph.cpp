#include "deepgraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "deepgraph/errors.hpp"

namespace deepgraph {

std::optional<std::string> validate(const Graph& g) {
  if (g.num_nodes < 0) return "negative node count";
  if (static_cast<int>(g.node_feat.size()) != g.num_nodes) return "node_feat length mismatch";
  if (g.edge_feat.size() != g.edges.size()) return "edge_feat length mismatch";
  std::set<std::pair<int, int>> seen;
  for (const auto& e : g.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= g.num_nodes || e.v >= g.num_nodes) {
      return "endpoint out of range";
    }
    if (e.u == e.v) return "self-loop";
    if (!seen.insert(std::minmax(e.u, e.v)).second) return "duplicate edge";
  }
  for (int f : g.node_feat) {
    if (f < 0) return "negative node feature";
  }
  for (int f : g.edge_feat) {
    if (f < 0) return "negative edge feature";
  }
  if (!g.node_labels.empty()) {
    if (static_cast<int>(g.node_labels.size()) != g.num_nodes) return "node label length mismatch";
    for (int y : g.node_labels) {
      if (y < 0) return "negative node label";
    }
  }
  return std::nullopt;
}

Adjacency::Adjacency(const Graph& g)
    : n_(g.num_nodes), nbrs_(g.num_nodes), edge_id_(static_cast<std::size_t>(g.num_nodes) * g.num_nodes, -1) {
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    nbrs_[e.u].push_back(e.v);
    nbrs_[e.v].push_back(e.u);
    edge_id_[e.u * n_ + e.v] = static_cast<int>(k);
    edge_id_[e.v * n_ + e.u] = static_cast<int>(k);
  }
  for (auto& l : nbrs_) std::sort(l.begin(), l.end());
}

DistanceTable all_pairs_distances(const Graph& g) {
  const int n = g.num_nodes;
  Adjacency adj(g);
  DistanceTable t;
  t.n = n;
  t.dis.assign(static_cast<std::size_t>(n) * n, kMaxDistBucket);
  t.reach.assign(static_cast<std::size_t>(n) * n, 0);
  t.sp_edges.assign(static_cast<std::size_t>(n) * n, {});

  std::vector<int> level(n);
  std::vector<int> pred(n);
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    std::fill(level.begin(), level.end(), -1);
    level[s] = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int w : adj.neighbors(u)) {
        if (level[w] < 0) {
          level[w] = level[u] + 1;
          queue.push_back(w);
        }
      }
    }
    // neighbours are sorted, so the first one a level closer is the smallest
    for (int v = 0; v < n; ++v) {
      pred[v] = -1;
      if (level[v] <= 0) continue;
      for (int w : adj.neighbors(v)) {
        if (level[w] == level[v] - 1) {
          pred[v] = w;
          break;
        }
      }
    }
    for (int v = 0; v < n; ++v) {
      if (level[v] < 0) continue;
      const std::size_t idx = static_cast<std::size_t>(s) * n + v;
      t.dis[idx] = level[v];
      t.reach[idx] = 1;
      auto& path = t.sp_edges[idx];
      path.reserve(level[v]);
      for (int cur = v; cur != s; cur = pred[cur]) path.push_back(adj.edge_index(pred[cur], cur));
      std::reverse(path.begin(), path.end());
    }
  }
  return t;
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["num_nodes"] = g.num_nodes;
  auto edges = nlohmann::json::array();
  for (const auto& e : g.edges) edges.push_back({e.u, e.v});
  j["edges"] = std::move(edges);
  j["node_feat"] = g.node_feat;
  j["edge_feat"] = g.edge_feat;
  if (!g.node_labels.empty()) {
    j["target"] = g.node_labels;
  } else if (g.target) {
    j["target"] = *g.target;
  } else {
    j["target"] = nullptr;
  }
  return j;
}

Graph graph_from_json(const nlohmann::json& j) {
  Graph g;
  try {
    g.num_nodes = j.at("num_nodes").get<int>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw DataError("edge must be a two-element array");
      g.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    g.node_feat = j.contains("node_feat") ? j["node_feat"].get<std::vector<int>>()
                                          : std::vector<int>(g.num_nodes, 0);
    g.edge_feat = j.contains("edge_feat") ? j["edge_feat"].get<std::vector<int>>()
                                          : std::vector<int>(g.edges.size(), 0);
    if (j.contains("target")) {
      const auto& t = j["target"];
      if (t.is_number()) {
        g.target = t.get<double>();
      } else if (t.is_array()) {
        g.node_labels = t.get<std::vector<int>>();
      } else if (!t.is_null()) {
        throw DataError("target must be a number, an array of labels, or null");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph record: ") + e.what());
  }
  if (auto bad = validate(g)) throw DataError("invalid graph: " + *bad);
  return g;
}

std::vector<Graph> parse_graphs_jsonl(std::istream& in) {
  std::vector<Graph> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      out.push_back(graph_from_json(j));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Graph> read_graphs_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_graphs_jsonl(in);
}

void write_graphs_jsonl(const std::string& path, const std::vector<Graph>& graphs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& g : graphs) out << graph_to_json(g).dump() << '\n';
}

}  // namespace deepgraph
