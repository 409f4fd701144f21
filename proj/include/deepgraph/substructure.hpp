#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deepgraph/graph.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

enum class SubKind : std::uint8_t { cycle, star, path, khop, rwalk };
inline constexpr std::array<SubKind, 5> kAllKinds{SubKind::cycle, SubKind::star, SubKind::path,
                                                  SubKind::khop, SubKind::rwalk};

std::string_view kind_name(SubKind k);
std::optional<SubKind> parse_kind(std::string_view s);

/// An induced subgraph: sorted node list plus the parent edges among those nodes.
struct Substructure {
  std::vector<int> nodes;           // sorted, distinct
  std::vector<std::uint8_t> adj;    // size()*size(), row-major, in `nodes` order
  SubKind kind = SubKind::cycle;
  int center = -1;                  // star centre or neighbourhood root, -1 otherwise

  int size() const { return static_cast<int>(nodes.size()); }
  bool edge(int a, int b) const { return adj[a * size() + b] != 0; }
};

/// Builds the induced substructure on `nodes` (any order, duplicates rejected).
Substructure make_induced(const Adjacency& adj, std::vector<int> nodes, SubKind kind, int center = -1);

std::vector<Substructure> enumerate_cycles(const Graph& g, int k_min, int k_max);
std::vector<Substructure> enumerate_stars(const Graph& g, int leaves_min, int leaves_max);
std::vector<Substructure> enumerate_paths(const Graph& g, int k_min, int k_max);

Substructure khop_neighborhood(const Graph& g, int v, int k);
Substructure random_walk_neighborhood(const Graph& g, int v, int steps, Rng& rng);

/// Keeps the root and a uniform subset of the other nodes so that at most
/// `s_max` nodes remain; adjacency is rebuilt on the kept nodes.
Substructure truncate_neighborhood(const Adjacency& adj, const Substructure& s, int s_max, Rng& rng);

struct VocabConfig {
  bool cycles = true;
  int cycle_min = 3, cycle_max = 8;
  bool stars = true;
  int star_leaves_min = 2, star_leaves_max = 6;
  bool paths = true;
  int path_min = 4, path_max = 8;
  bool khop = false;
  int khop_k = 2;
  bool rwalk = false;
  int rwalk_steps = 10;
  int s_max = 10;

  static VocabConfig geometric();
  static VocabConfig from_kinds(const std::vector<SubKind>& kinds);
};

struct SubstructureSet {
  int graph_id = 0;
  std::vector<Substructure> items;
  std::array<std::vector<int>, kAllKinds.size()> by_kind;  // item indices per kind

  bool empty() const { return items.empty(); }
  /// Inserts unless an item with the same identity already exists. Geometric
  /// kinds are keyed by node set (plus centre for stars); neighbourhood kinds
  /// by (root, node set).
  bool add(Substructure s);
  void reindex();
};

/// Union of the configured enumerations. `rng` drives random walks and the
/// truncation of oversized neighbourhoods only.
SubstructureSet extract_all(const Graph& g, const VocabConfig& cfg, Rng& rng, int graph_id = 0);

// Cache file: JSON array of {"graph_id", "items": [{"kind","nodes","center"?}]}.
nlohmann::json set_to_json(const SubstructureSet& set);
SubstructureSet set_from_json(const nlohmann::json& j, const Graph& g);
void write_cache(const std::string& path, const std::vector<SubstructureSet>& sets);
std::vector<SubstructureSet> read_cache(const std::string& path, const std::vector<Graph>& graphs);

}  // namespace deepgraph
