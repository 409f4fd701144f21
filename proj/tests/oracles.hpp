#pragma once
// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "deepgraph/graph.hpp"
#include "deepgraph/rng.hpp"

namespace oracle {

using deepgraph::Graph;

inline Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  Graph g;
  g.num_nodes = n;
  for (auto [u, v] : edges) g.edges.push_back({u, v});
  g.node_feat.assign(n, 0);
  g.edge_feat.assign(edges.size(), 0);
  return g;
}

inline Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make_graph(n, e);
}

inline Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

inline Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

inline Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

inline Graph random_graph(int n, double p, deepgraph::Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return make_graph(n, e);
}

constexpr int kInf = std::numeric_limits<int>::max() / 4;

inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const int n = g.num_nodes;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// Shape of the subgraph induced by `mask`.
struct InducedShape {
  int size = 0;
  int edges = 0;
  bool connected = false;
  std::vector<int> nodes;
  std::vector<int> degree;  // aligned with nodes
};

inline InducedShape induced_shape(const Graph& g, unsigned mask) {
  InducedShape s;
  for (int v = 0; v < g.num_nodes; ++v)
    if (mask >> v & 1u) s.nodes.push_back(v);
  s.size = static_cast<int>(s.nodes.size());
  s.degree.assign(s.size, 0);
  std::vector<std::vector<int>> nb(s.size);
  auto pos = [&](int v) { return static_cast<int>(std::find(s.nodes.begin(), s.nodes.end(), v) - s.nodes.begin()); };
  for (const auto& e : g.edges) {
    if ((mask >> e.u & 1u) && (mask >> e.v & 1u)) {
      ++s.edges;
      int a = pos(e.u), b = pos(e.v);
      ++s.degree[a];
      ++s.degree[b];
      nb[a].push_back(b);
      nb[b].push_back(a);
    }
  }
  if (s.size > 0) {
    std::vector<int> seen(s.size, 0), stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : nb[u])
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    s.connected = count == s.size;
  }
  return s;
}

using NodeSet = std::vector<int>;

inline std::set<NodeSet> brute_cycles(const Graph& g, int kmin, int kmax) {
  std::set<NodeSet> out;
  for (unsigned mask = 1; mask < (1u << g.num_nodes); ++mask) {
    auto s = induced_shape(g, mask);
    if (s.size < 3 || s.size < kmin || s.size > kmax || !s.connected) continue;
    if (std::all_of(s.degree.begin(), s.degree.end(), [](int d) { return d == 2; })) out.insert(s.nodes);
  }
  return out;
}

inline std::set<NodeSet> brute_paths(const Graph& g, int kmin, int kmax) {
  std::set<NodeSet> out;
  for (unsigned mask = 1; mask < (1u << g.num_nodes); ++mask) {
    auto s = induced_shape(g, mask);
    if (s.size < 2 || s.size < kmin || s.size > kmax || !s.connected) continue;
    if (s.edges == s.size - 1 && *std::max_element(s.degree.begin(), s.degree.end()) <= 2) out.insert(s.nodes);
  }
  return out;
}

// (node set, centre) for induced stars with leaf count in [lmin, lmax]
inline std::set<std::pair<NodeSet, int>> brute_stars(const Graph& g, int lmin, int lmax) {
  std::set<std::pair<NodeSet, int>> out;
  for (unsigned mask = 1; mask < (1u << g.num_nodes); ++mask) {
    auto s = induced_shape(g, mask);
    const int leaves = s.size - 1;
    if (leaves < 2 || leaves < lmin || leaves > lmax || s.edges != leaves) continue;
    for (int i = 0; i < s.size; ++i)
      if (s.degree[i] == leaves) out.insert({s.nodes, s.nodes[i]});
  }
  return out;
}

// max over all one-hot C1, C2 (m^n each) of ||C1^T V - C2^T V||_F with V = E^T H W
inline double brute_capacity(const Eigen::MatrixXd& h, const Eigen::MatrixXd& e, const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd v = e.transpose() * h * w;
  const int n = static_cast<int>(h.rows());
  const int m = static_cast<int>(e.cols());
  long total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  double best = 0.0;
  std::vector<int> c1(n), c2(n);
  for (long a = 0; a < total; ++a) {
    long x = a;
    for (int i = 0; i < n; ++i, x /= m) c1[i] = static_cast<int>(x % m);
    for (long b = 0; b < total; ++b) {
      long y = b;
      for (int i = 0; i < n; ++i, y /= m) c2[i] = static_cast<int>(y % m);
      double sq = 0.0;
      for (int i = 0; i < n; ++i) sq += (v.row(c1[i]) - v.row(c2[i])).squaredNorm();
      best = std::max(best, std::sqrt(sq));
    }
  }
  return best;
}

// Largest singular value of a 2x2 matrix in closed form.
inline double sigma_max_2x2(double a, double b, double c, double d) {
  const double s1 = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  return std::sqrt((s1 + std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det))) / 2.0);
}

// Chooser that walks every branch of a randomized procedure, odometer style.
class BranchEnumerator {
 public:
  std::size_t pick(std::size_t k) {
    if (k <= 1) return 0;
    if (pos_ == script_.size()) script_.push_back(0);
    arity_.resize(pos_ + 1);
    arity_[pos_] = k;
    prob_ /= static_cast<double>(k);
    return script_[pos_++];
  }

  // Calls `run(chooser)` once per branch, `visit(result, probability)`.
  template <class Run, class Visit>
  void for_each_branch(Run run, Visit visit) {
    script_.clear();
    for (;;) {
      pos_ = 0;
      prob_ = 1.0;
      arity_.clear();
      auto result = run(*this);
      visit(result, prob_);
      script_.resize(pos_);
      int i = static_cast<int>(pos_) - 1;
      while (i >= 0 && script_[i] + 1 >= arity_[i]) --i;
      if (i < 0) return;
      script_.resize(i + 1);
      ++script_[i];
    }
  }

 private:
  std::vector<std::size_t> script_;
  std::vector<std::size_t> arity_;
  std::size_t pos_ = 0;
  double prob_ = 1.0;
};

// Central finite-difference gradient of f at every entry of `x`.
inline Eigen::MatrixXd finite_difference(Eigen::MatrixXd& x, const std::function<double()>& f, double step) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double keep = x(i, j);
      x(i, j) = keep + step;
      const double up = f();
      x(i, j) = keep - step;
      const double down = f();
      x(i, j) = keep;
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace oracle
