#include "deepgraph/substructure.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <tuple>
#include <utility>

#include "deepgraph/errors.hpp"

namespace deepgraph {

namespace {

constexpr std::array<std::string_view, kAllKinds.size()> kKindNames{"cycle", "star", "path", "khop",
                                                                    "rwalk"};

class CycleSearch {
 public:
  CycleSearch(const Adjacency& adj, int k_min, int k_max, std::vector<Substructure>& out)
      : adj_(adj), k_min_(k_min), k_max_(k_max), out_(out), in_path_(adj.num_nodes(), 0) {}

  void run() {
    for (int s = 0; s < adj_.num_nodes(); ++s) {
      path_.assign(1, s);
      in_path_[s] = 1;
      extend();
      in_path_[s] = 0;
    }
  }

 private:
  // path_ is an induced path whose smallest node is path_[0]
  void extend() {
    const int s = path_.front();
    const int last = path_.back();
    const int len = static_cast<int>(path_.size());
    for (int v : adj_.neighbors(last)) {
      if (v <= s || in_path_[v]) continue;
      bool chord = false;
      for (int i = 1; i + 1 < len && !chord; ++i) chord = adj_.connected(v, path_[i]);
      if (chord) continue;
      if (len >= 2 && adj_.connected(v, s)) {
        // closes a chordless cycle; report one traversal direction only
        if (path_[1] < v && len + 1 >= k_min_ && len + 1 <= k_max_) {
          std::vector<int> nodes = path_;
          nodes.push_back(v);
          out_.push_back(make_induced(adj_, std::move(nodes), SubKind::cycle));
        }
        continue;
      }
      if (len + 2 > k_max_) continue;
      path_.push_back(v);
      in_path_[v] = 1;
      extend();
      in_path_[v] = 0;
      path_.pop_back();
    }
  }

  const Adjacency& adj_;
  int k_min_, k_max_;
  std::vector<Substructure>& out_;
  std::vector<int> path_;
  std::vector<std::uint8_t> in_path_;
};

class PathSearch {
 public:
  PathSearch(const Adjacency& adj, int k_min, int k_max, std::vector<Substructure>& out)
      : adj_(adj), k_min_(k_min), k_max_(k_max), out_(out), in_path_(adj.num_nodes(), 0) {}

  void run() {
    for (int s = 0; s < adj_.num_nodes(); ++s) {
      path_.assign(1, s);
      in_path_[s] = 1;
      extend();
      in_path_[s] = 0;
    }
  }

 private:
  void extend() {
    const int len = static_cast<int>(path_.size());
    if (len >= k_min_ && len >= 2 && path_.front() < path_.back()) {
      out_.push_back(make_induced(adj_, path_, SubKind::path));
    }
    if (len >= k_max_) return;
    for (int v : adj_.neighbors(path_.back())) {
      if (in_path_[v]) continue;
      bool chord = false;
      for (int i = 0; i + 1 < len && !chord; ++i) chord = adj_.connected(v, path_[i]);
      if (chord) continue;
      path_.push_back(v);
      in_path_[v] = 1;
      extend();
      in_path_[v] = 0;
      path_.pop_back();
    }
  }

  const Adjacency& adj_;
  int k_min_, k_max_;
  std::vector<Substructure>& out_;
  std::vector<int> path_;
  std::vector<std::uint8_t> in_path_;
};

void choose_leaves(const Adjacency& adj, int center, const std::vector<int>& nbrs, std::size_t start,
                   std::vector<int>& leaves, int lmin, int lmax, std::vector<Substructure>& out) {
  const int count = static_cast<int>(leaves.size());
  if (count >= lmin) {
    std::vector<int> nodes = leaves;
    nodes.push_back(center);
    out.push_back(make_induced(adj, std::move(nodes), SubKind::star, center));
  }
  if (count >= lmax) return;
  for (std::size_t i = start; i < nbrs.size(); ++i) {
    const int cand = nbrs[i];
    bool independent = true;
    for (int l : leaves) {
      if (adj.connected(l, cand)) {
        independent = false;
        break;
      }
    }
    if (!independent) continue;
    leaves.push_back(cand);
    choose_leaves(adj, center, nbrs, i + 1, leaves, lmin, lmax, out);
    leaves.pop_back();
  }
}

void sort_by_nodes(std::vector<Substructure>& items) {
  std::sort(items.begin(), items.end(), [](const Substructure& a, const Substructure& b) {
    return std::tie(a.nodes, a.center) < std::tie(b.nodes, b.center);
  });
}

}  // namespace

std::string_view kind_name(SubKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<SubKind> parse_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return kAllKinds[i];
  }
  return std::nullopt;
}

Substructure make_induced(const Adjacency& adj, std::vector<int> nodes, SubKind kind, int center) {
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw DataError("substructure has duplicate nodes");
  }
  for (int v : nodes) {
    if (v < 0 || v >= adj.num_nodes()) throw DataError("substructure node out of range");
  }
  Substructure s;
  s.nodes = std::move(nodes);
  s.kind = kind;
  s.center = center;
  const int k = s.size();
  s.adj.assign(static_cast<std::size_t>(k) * k, 0);
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (adj.connected(s.nodes[a], s.nodes[b])) {
        s.adj[a * k + b] = 1;
        s.adj[b * k + a] = 1;
      }
    }
  }
  return s;
}

std::vector<Substructure> enumerate_cycles(const Graph& g, int k_min, int k_max) {
  std::vector<Substructure> out;
  if (k_min < 3) k_min = 3;
  if (k_max < k_min) return out;
  Adjacency adj(g);
  CycleSearch(adj, k_min, k_max, out).run();
  sort_by_nodes(out);
  return out;
}

std::vector<Substructure> enumerate_stars(const Graph& g, int leaves_min, int leaves_max) {
  std::vector<Substructure> out;
  if (leaves_min < 2) leaves_min = 2;
  if (leaves_max < leaves_min) return out;
  Adjacency adj(g);
  std::vector<int> leaves;
  for (int c = 0; c < g.num_nodes; ++c) {
    if (adj.degree(c) < leaves_min) continue;
    choose_leaves(adj, c, adj.neighbors(c), 0, leaves, leaves_min, leaves_max, out);
  }
  sort_by_nodes(out);
  return out;
}

std::vector<Substructure> enumerate_paths(const Graph& g, int k_min, int k_max) {
  std::vector<Substructure> out;
  if (k_min < 2) k_min = 2;
  if (k_max < k_min) return out;
  Adjacency adj(g);
  PathSearch(adj, k_min, k_max, out).run();
  sort_by_nodes(out);
  return out;
}

Substructure khop_neighborhood(const Graph& g, int v, int k) {
  if (v < 0 || v >= g.num_nodes) throw DataError("khop root out of range");
  Adjacency adj(g);
  std::vector<int> level(g.num_nodes, -1);
  std::vector<int> nodes{v};
  std::deque<int> queue{v};
  level[v] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (level[u] >= k) continue;
    for (int w : adj.neighbors(u)) {
      if (level[w] < 0) {
        level[w] = level[u] + 1;
        nodes.push_back(w);
        queue.push_back(w);
      }
    }
  }
  return make_induced(adj, std::move(nodes), SubKind::khop, v);
}

Substructure random_walk_neighborhood(const Graph& g, int v, int steps, Rng& rng) {
  if (v < 0 || v >= g.num_nodes) throw DataError("random walk root out of range");
  Adjacency adj(g);
  std::vector<std::uint8_t> seen(g.num_nodes, 0);
  std::vector<int> nodes{v};
  seen[v] = 1;
  int cur = v;
  for (int step = 0; step < steps; ++step) {
    const auto& nb = adj.neighbors(cur);
    if (nb.empty()) break;
    cur = nb[uniform_index(rng, nb.size())];
    if (!seen[cur]) {
      seen[cur] = 1;
      nodes.push_back(cur);
    }
  }
  return make_induced(adj, std::move(nodes), SubKind::rwalk, v);
}

Substructure truncate_neighborhood(const Adjacency& adj, const Substructure& s, int s_max, Rng& rng) {
  if (s.size() <= s_max) return s;
  std::vector<int> others;
  for (int v : s.nodes) {
    if (v != s.center) others.push_back(v);
  }
  const int keep = s.center >= 0 ? s_max - 1 : s_max;
  for (int i = 0; i < keep; ++i) {
    std::size_t j = i + uniform_index(rng, others.size() - i);
    std::swap(others[i], others[j]);
  }
  others.resize(keep);
  if (s.center >= 0) others.push_back(s.center);
  return make_induced(adj, std::move(others), s.kind, s.center);
}

VocabConfig VocabConfig::geometric() { return VocabConfig{}; }

VocabConfig VocabConfig::from_kinds(const std::vector<SubKind>& kinds) {
  VocabConfig cfg;
  cfg.cycles = cfg.stars = cfg.paths = cfg.khop = cfg.rwalk = false;
  for (SubKind k : kinds) {
    switch (k) {
      case SubKind::cycle: cfg.cycles = true; break;
      case SubKind::star: cfg.stars = true; break;
      case SubKind::path: cfg.paths = true; break;
      case SubKind::khop: cfg.khop = true; break;
      case SubKind::rwalk: cfg.rwalk = true; break;
    }
  }
  return cfg;
}

bool SubstructureSet::add(Substructure s) {
  for (int idx : by_kind[static_cast<std::size_t>(s.kind)]) {
    const auto& other = items[idx];
    if (other.center == s.center && other.nodes == s.nodes) return false;
  }
  by_kind[static_cast<std::size_t>(s.kind)].push_back(static_cast<int>(items.size()));
  items.push_back(std::move(s));
  return true;
}

void SubstructureSet::reindex() {
  for (auto& v : by_kind) v.clear();
  for (std::size_t i = 0; i < items.size(); ++i) {
    by_kind[static_cast<std::size_t>(items[i].kind)].push_back(static_cast<int>(i));
  }
}

SubstructureSet extract_all(const Graph& g, const VocabConfig& cfg, Rng& rng, int graph_id) {
  SubstructureSet set;
  set.graph_id = graph_id;
  if (cfg.cycles) {
    for (auto& s : enumerate_cycles(g, cfg.cycle_min, cfg.cycle_max)) set.add(std::move(s));
  }
  if (cfg.stars) {
    for (auto& s : enumerate_stars(g, cfg.star_leaves_min, cfg.star_leaves_max)) set.add(std::move(s));
  }
  if (cfg.paths) {
    for (auto& s : enumerate_paths(g, cfg.path_min, cfg.path_max)) set.add(std::move(s));
  }
  if (cfg.khop || cfg.rwalk) {
    Adjacency adj(g);
    if (cfg.khop) {
      for (int v = 0; v < g.num_nodes; ++v) {
        set.add(truncate_neighborhood(adj, khop_neighborhood(g, v, cfg.khop_k), cfg.s_max, rng));
      }
    }
    if (cfg.rwalk) {
      for (int v = 0; v < g.num_nodes; ++v) {
        auto walk = random_walk_neighborhood(g, v, cfg.rwalk_steps, rng);
        set.add(truncate_neighborhood(adj, walk, cfg.s_max, rng));
      }
    }
  }
  return set;
}

nlohmann::json set_to_json(const SubstructureSet& set) {
  auto items = nlohmann::json::array();
  for (const auto& s : set.items) {
    nlohmann::json it{{"kind", kind_name(s.kind)}, {"nodes", s.nodes}};
    if (s.center >= 0) it["center"] = s.center;
    items.push_back(std::move(it));
  }
  return {{"graph_id", set.graph_id}, {"items", std::move(items)}};
}

SubstructureSet set_from_json(const nlohmann::json& j, const Graph& g) {
  SubstructureSet set;
  Adjacency adj(g);
  try {
    set.graph_id = j.at("graph_id").get<int>();
    for (const auto& it : j.at("items")) {
      auto kind = parse_kind(it.at("kind").get<std::string>());
      if (!kind) throw DataError("unknown substructure kind " + it.at("kind").dump());
      int center = it.contains("center") ? it["center"].get<int>() : -1;
      auto nodes = it.at("nodes").get<std::vector<int>>();
      if (nodes.empty()) throw DataError("empty substructure in cache");
      set.add(make_induced(adj, std::move(nodes), *kind, center));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed cache entry: ") + e.what());
  }
  return set;
}

void write_cache(const std::string& path, const std::vector<SubstructureSet>& sets) {
  auto arr = nlohmann::json::array();
  for (const auto& s : sets) arr.push_back(set_to_json(s));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << arr.dump() << '\n';
}

std::vector<SubstructureSet> read_cache(const std::string& path, const std::vector<Graph>& graphs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("cache is not valid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw DataError("cache must be a JSON array");
  std::vector<SubstructureSet> sets(graphs.size());
  std::vector<std::uint8_t> seen(graphs.size(), 0);
  for (const auto& entry : arr) {
    int id = entry.value("graph_id", -1);
    if (id < 0 || id >= static_cast<int>(graphs.size())) {
      throw DataError("cache references unknown graph id " + std::to_string(id));
    }
    sets[id] = set_from_json(entry, graphs[id]);
    seen[id] = 1;
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (!seen[i]) throw DataError("cache has no entry for graph " + std::to_string(i));
  }
  return sets;
}

}  // namespace deepgraph
