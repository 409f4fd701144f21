#pragma once

#include <vector>

#include "deepgraph/graph.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

/// Number of induced cycles of length 3..8 (the raw regression target).
int count_induced_cycles(const Graph& g);

/// Random G(n, p) graphs with n uniform in [nodes_min, nodes_max] (within [4, 24]).
/// Node feature = min(degree, 7); target = induced cycle count, standardised over the dataset.
std::vector<Graph> gen_cycle_regression(int n_graphs, int nodes_min, int nodes_max, double edge_prob, Rng& rng);

/// Two-block stochastic block graphs. Label = block id; a `reveal_frac` share of
/// nodes carry feature label+1, the rest feature 0.
std::vector<Graph> gen_community_nodes(int n_graphs, int nodes_per_block, double p_in, double p_out, Rng& rng,
                                       double reveal_frac = 0.1);

}  // namespace deepgraph
