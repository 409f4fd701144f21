#include "deepgraph/canonical.hpp"

#include <stdexcept>
#include <string>

namespace deepgraph {

std::vector<int> dfs_order(std::span<const std::uint8_t> adj, int n, Rng& rng) {
  RngChooser chooser{rng};
  return dfs_order_with(adj, n, chooser);
}

std::vector<std::uint8_t> flatten_permuted(std::span<const std::uint8_t> adj, int n, const std::vector<int>& perm,
                                           int s_max) {
  std::vector<std::uint8_t> flat(static_cast<std::size_t>(flat_length(s_max)), 0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) flat[flat_index(a, b, s_max)] = adj[perm[a] * n + perm[b]];
  }
  return flat;
}

CanonicalForm canonicalize(const Substructure& s, Rng& rng, int s_max) {
  if (s.size() > s_max) {
    throw std::invalid_argument("substructure of size " + std::to_string(s.size()) + " exceeds s_max=" +
                                std::to_string(s_max));
  }
  CanonicalForm form;
  form.size = s.size();
  form.perm = dfs_order(s.adj, s.size(), rng);
  form.flat_adj = flatten_permuted(s.adj, s.size(), form.perm, s_max);
  return form;
}

std::vector<CanonicalForm> canonicalize_pooled(const Substructure& s, int num_samples, Rng& rng, int s_max) {
  if (num_samples < 1) throw std::invalid_argument("num_samples must be at least 1");
  std::vector<CanonicalForm> forms;
  forms.reserve(num_samples);
  for (int i = 0; i < num_samples; ++i) forms.push_back(canonicalize(s, rng, s_max));
  return forms;
}

}  // namespace deepgraph
