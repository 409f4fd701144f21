#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "deepgraph/rng.hpp"
#include "deepgraph/substructure.hpp"

namespace deepgraph {

/// Default cap on substructure size fed to the token encoder.
inline constexpr int kDefaultSMax = 10;

/// A substructure adjacency under one DFS ordering.
struct CanonicalForm {
  std::vector<int> perm;               // perm[k] = local node index placed at position k
  std::vector<std::uint8_t> flat_adj;  // upper triangle of the s_max x s_max padded matrix
  int size = 0;
};

inline int flat_length(int s_max) { return s_max * (s_max - 1) / 2; }

/// Index of pair (a, b), a < b, in the row-major upper triangle of an s_max x s_max matrix.
inline int flat_index(int a, int b, int s_max) { return a * s_max - a * (a + 1) / 2 + (b - a - 1); }

/// Source of uniform choices for the randomized DFS. `pick(k)` returns a value in [0, k).
struct RngChooser {
  Rng& rng;
  std::size_t pick(std::size_t k) { return k <= 1 ? 0 : uniform_index(rng, k); }
};

namespace detail {

template <class Chooser>
class DegreeDfs {
 public:
  DegreeDfs(std::span<const std::uint8_t> adj, int n, Chooser& choose)
      : adj_(adj), n_(n), choose_(choose), degree_(n, 0), visited_(n, 0) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) degree_[a] += adj[a * n + b] ? 1 : 0;
    }
  }

  std::vector<int> run() {
    order_.clear();
    while (static_cast<int>(order_.size()) < n_) {
      int best = n_;
      for (int v = 0; v < n_; ++v) {
        if (!visited_[v]) best = std::min(best, degree_[v]);
      }
      std::vector<int> starts;
      for (int v = 0; v < n_; ++v) {
        if (!visited_[v] && degree_[v] == best) starts.push_back(v);
      }
      visit(starts[choose_.pick(starts.size())]);
    }
    return order_;
  }

 private:
  void visit(int u) {
    visited_[u] = 1;
    order_.push_back(u);
    std::vector<int> next;
    for (int w = 0; w < n_; ++w) {
      if (adj_[u * n_ + w] && !visited_[w]) next.push_back(w);
    }
    std::stable_sort(next.begin(), next.end(), [&](int a, int b) { return degree_[a] < degree_[b]; });
    // uniform permutation inside each equal-degree run
    for (std::size_t lo = 0; lo < next.size();) {
      std::size_t hi = lo;
      while (hi < next.size() && degree_[next[hi]] == degree_[next[lo]]) ++hi;
      for (std::size_t i = hi - 1; i > lo; --i) {
        std::size_t j = lo + choose_.pick(i - lo + 1);
        std::swap(next[i], next[j]);
      }
      lo = hi;
    }
    for (int w : next) {
      if (!visited_[w]) visit(w);
    }
  }

  std::span<const std::uint8_t> adj_;
  int n_;
  Chooser& choose_;
  std::vector<int> degree_;
  std::vector<std::uint8_t> visited_;
  std::vector<int> order_;
};

}  // namespace detail

/// Degree-guided randomized DFS over a symmetric 0/1 adjacency (row-major, n x n).
/// Starts from a uniformly chosen minimum-degree node; neighbours are explored in
/// ascending degree with equal-degree ties permuted uniformly; restarts on
/// disconnected remainders.
template <class Chooser>
std::vector<int> dfs_order_with(std::span<const std::uint8_t> adj, int n, Chooser& choose) {
  return detail::DegreeDfs<Chooser>(adj, n, choose).run();
}

std::vector<int> dfs_order(std::span<const std::uint8_t> adj, int n, Rng& rng);

/// Flattens `adj` under ordering `perm` into an s_max-padded upper triangle.
std::vector<std::uint8_t> flatten_permuted(std::span<const std::uint8_t> adj, int n, const std::vector<int>& perm,
                                           int s_max);

/// Throws std::invalid_argument when the substructure is larger than s_max.
CanonicalForm canonicalize(const Substructure& s, Rng& rng, int s_max = kDefaultSMax);

std::vector<CanonicalForm> canonicalize_pooled(const Substructure& s, int num_samples, Rng& rng,
                                               int s_max = kDefaultSMax);

}  // namespace deepgraph
