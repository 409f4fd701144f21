#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deepgraph/rng.hpp"
#include "deepgraph/substructure.hpp"

namespace deepgraph {

/// Greedy coverage sampler settings.
///   thre      minimum number of times every node should be covered
///   n_init    items drawn up front, balanced over kinds
///   top_k     size of the candidate pool ranked by uncovered-node count
///   n_sample  items drawn from the pool per iteration
///   m_max     hard cap on the number of sampled items
struct SamplerParams {
  int thre = 1;
  int n_init = 1;
  int top_k = 2;
  int n_sample = 1;
  int m_max = 1;

  /// n_init = max(1, ceil(n/4)), n_sample = max(1, ceil(n/8)), top_k = 2 n_sample, m_max = n.
  static SamplerParams defaults_for(int num_nodes, int thre = 1);
  std::optional<std::string> check() const;
};

/// Returns distinct item indices into `set.items`.
std::vector<int> sample_substructures(const SubstructureSet& set, int num_nodes, const SamplerParams& p,
                                      Rng& rng);

}  // namespace deepgraph
