#include "deepgraph/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "deepgraph/errors.hpp"
#include "deepgraph/linalg.hpp"
#include "deepgraph/rng.hpp"

namespace deepgraph {

namespace {

Matrix gaussian(int rows, int cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

// Uniform draw from the probability simplex over `k` entries.
Vector simplex_point(int k, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector x(k);
  for (int i = 0; i < k; ++i) x(i) = expo(rng);
  return x / x.sum();
}

// Diagonal layer-norm style scaling: per-feature gain over the feature's spread.
Matrix layer_norm_scaling(const Matrix& x, Rng& rng) {
  std::uniform_real_distribution<double> gain(0.5, 1.5);
  const Eigen::Index d = x.cols();
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double var = centered.col(k).squaredNorm() / static_cast<double>(x.rows());
    out(k, k) = gain(rng) / std::sqrt(var + kLayerNormEps);
  }
  return out;
}

double max_row_distance(const Matrix& v) {
  double best = 0.0;
  for (Eigen::Index a = 0; a < v.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < v.rows(); ++b) best = std::max(best, (v.row(a) - v.row(b)).norm());
  }
  return best;
}

Matrix stacked_pre_norm(const Matrix& h, const Matrix& a, const Matrix& wvo, const Vector& b) {
  const Matrix ph = centering(static_cast<int>(h.rows())) * h;
  Matrix y = ph + a * ph * wvo;
  y.rowwise() -= b.transpose();
  return y;
}

std::vector<std::vector<int>> random_memberships(int n, int m, Rng& rng) {
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> out;
  std::bernoulli_distribution coin(0.5);
  const long distinct = n < 30 ? (1L << n) - 1 : std::numeric_limits<long>::max();
  while (static_cast<int>(out.size()) < m && static_cast<long>(out.size()) < distinct) {
    std::vector<int> nodes;
    for (int v = 0; v < n; ++v) {
      if (coin(rng)) nodes.push_back(v);
    }
    if (nodes.empty() || !seen.insert(nodes).second) continue;
    out.push_back(std::move(nodes));
  }
  return out;
}

}  // namespace

Matrix pattern_basis(int n, const std::vector<std::vector<int>>& memberships) {
  Matrix e = Matrix::Zero(n, static_cast<Eigen::Index>(memberships.size()));
  for (std::size_t j = 0; j < memberships.size(); ++j) {
    const auto& nodes = memberships[j];
    if (nodes.empty()) throw std::invalid_argument("substructure with no nodes");
    for (int v : nodes) {
      if (v < 0 || v >= n) throw std::invalid_argument("substructure node out of range");
      e(v, static_cast<Eigen::Index>(j)) = 1.0 / static_cast<double>(nodes.size());
    }
  }
  return e;
}

double attention_capacity(const Matrix& h, const Matrix& e, const Matrix& wvo) {
  if (e.cols() < 1) throw std::invalid_argument("attention capacity needs at least one substructure");
  if (e.rows() != h.rows() || h.cols() != wvo.rows()) throw std::invalid_argument("capacity shape mismatch");
  const Matrix v = e.transpose() * h * wvo;
  return std::sqrt(static_cast<double>(h.rows())) * max_row_distance(v);
}

HeadwiseValue layer_capacity(const ForwardTrace& trace, const Matrix& e, const ModelParams& p, int layer) {
  const auto& lt = trace.layers.at(layer);
  const Matrix h = lt.h_in.topRows(e.rows());
  HeadwiseValue out;
  for (int hd = 0; hd < p.config.heads; ++hd) out.per_head.push_back(attention_capacity(h, e, p.wvo(layer, hd)));
  for (double v : out.per_head) out.mean += v;
  out.mean /= static_cast<double>(out.per_head.size());
  return out;
}

HeadwiseValue normalized_capacity(const ForwardTrace& trace, const Matrix& e, const ModelParams& p, int layer) {
  const auto& lt = trace.layers.at(layer);
  const Matrix h = lt.h_in.topRows(e.rows());
  HeadwiseValue out;
  for (int hd = 0; hd < p.config.heads; ++hd) {
    const Matrix wvo = p.wvo(layer, hd);
    const double denom = (h * wvo).rowwise().norm().sum();
    if (!(denom > 0.0)) throw NumericError("value vectors have zero total norm");
    out.per_head.push_back(attention_capacity(h, e, wvo) / denom);
  }
  for (double v : out.per_head) out.mean += v;
  out.mean /= static_cast<double>(out.per_head.size());
  return out;
}

double token_capacity_of(const Matrix& states, const Matrix& wvo) {
  if (states.rows() < 2) throw std::invalid_argument("token capacity needs at least two substructure tokens");
  const Matrix v = states * wvo;
  const double mean_norm = v.rowwise().norm().mean();
  if (!(mean_norm > 0.0)) {
    if (max_row_distance(v) == 0.0) return 0.0;
    throw NumericError("substructure token values have zero mean norm");
  }
  return max_row_distance(v) / mean_norm;
}

HeadwiseValue token_capacity(const ForwardTrace& trace, const ModelParams& p, int layer, int n) {
  const auto& lt = trace.layers.at(layer);
  const Eigen::Index m = lt.h_in.rows() - n;
  if (m < 2) throw std::invalid_argument("token capacity needs at least two substructure tokens");
  const Matrix states = lt.h_in.bottomRows(m);
  HeadwiseValue out;
  for (int hd = 0; hd < p.config.heads; ++hd) out.per_head.push_back(token_capacity_of(states, p.wvo(layer, hd)));
  for (double v : out.per_head) out.mean += v;
  out.mean /= static_cast<double>(out.per_head.size());
  return out;
}

double alpha_coefficient(const Matrix& h, const Matrix& a, const Matrix& wvo, const Vector& b, const Matrix& d) {
  const Matrix p = centering(static_cast<int>(h.rows()));
  const double num = ((p * h + p * a * h * wvo) * d).norm();
  const double den = (stacked_pre_norm(h, a, wvo, b) * d).norm();
  if (!(den > 0.0)) throw NumericError("alpha coefficient has zero denominator");
  return num / den;
}

double lambda_coefficient(const Matrix& h, const Matrix& a, const Matrix& wvo, const Vector& b, const Matrix& d) {
  const double ph = (centering(static_cast<int>(h.rows())) * h).norm();
  if (!(ph > 0.0)) throw NumericError("lambda coefficient has zero denominator");
  return (stacked_pre_norm(h, a, wvo, b) * d).norm() / ph;
}

double gamma_coefficient(const Matrix& d_prime, const Matrix& w_f1, const Matrix& w_f2) {
  return spectral_norm(d_prime) * (1.0 + spectral_norm(w_f1) * spectral_norm(w_f2));
}

BoundReport verify_stack_bound(const StackSpec& spec, int trials, std::uint64_t seed) {
  if (spec.max_depth < 1 || spec.max_n < 2 || spec.max_m < 1 || spec.d < 1) {
    throw std::invalid_argument("stack dimensions must be positive");
  }
  BoundReport rep;
  rep.theorem = spec.with_ffn ? 2 : 1;
  rep.seed = seed;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng rng = split_rng(seed, {static_cast<std::uint64_t>(t)});
    StackTrial trial;
    trial.depth = std::uniform_int_distribution<int>(1, spec.max_depth)(rng);
    trial.n = std::uniform_int_distribution<int>(2, spec.max_n)(rng);
    trial.m = std::uniform_int_distribution<int>(1, spec.max_m)(rng);
    trial.d = std::max(spec.d, trial.n);
    const int n = trial.n, d = trial.d;
    const auto members = random_memberships(n, trial.m, rng);
    trial.m = static_cast<int>(members.size());
    const int m = trial.m;
    const Matrix e = pattern_basis(n, members);
    const Matrix p_n = centering(n);
    const double pm_et = spectral_norm(centering(m) * e.transpose());

    Matrix h = gaussian(n, d, 1.0, rng);
    const double ph1 = (p_n * h).norm();
    double prefix = 1.0;
    for (int l = 1; l <= trial.depth; ++l) {
      StackLayerRecord rec;
      rec.layer = l;
      const Matrix w = gaussian(d, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
      Matrix c(m, n);
      for (int i = 0; i < n; ++i) c.col(i) = simplex_point(m, rng);
      const Matrix a = c.transpose() * e.transpose();

      rec.capacity = attention_capacity(h, e, w);
      rec.bound = std::sqrt(2.0 * m) * prefix * pm_et * spectral_norm(w) * ph1;
      rec.bound_ok = rec.capacity <= rec.bound * (1.0 + 1e-12);

      // biases at the scale of the current spread keep deep stacks well conditioned
      const double rms = (p_n * h).norm() / std::sqrt(static_cast<double>(n) * d);
      const Vector b = gaussian(d, 1, 0.5 * rms, rng).col(0);
      Matrix x = h + a * h * w;
      x.rowwise() -= b.transpose();
      const Matrix d_raw = layer_norm_scaling(x, rng);
      rec.lambda_raw = lambda_coefficient(h, a, w, b, d_raw);
      // norm-preserving regime: rescale D so that lambda == 1
      const Matrix dmat = d_raw / rec.lambda_raw;
      rec.alpha = alpha_coefficient(h, a, w, b, dmat);
      prefix *= rec.alpha;
      h = x * dmat;
      // every attention-only quantity ignores the mean row; drop it to avoid cancellation
      if (!spec.with_ffn) h = p_n * h;

      if (spec.with_ffn) {
        const int dff = 2 * d;
        const Matrix w1 = gaussian(d, dff, 1.0 / std::sqrt(static_cast<double>(d)), rng);
        const Matrix w2 = gaussian(dff, d, 1.0 / std::sqrt(static_cast<double>(dff)), rng);
        const double scale = (p_n * h).norm() / std::sqrt(static_cast<double>(n) * d);
        const Matrix b1 = gaussian(1, dff, 0.5 * scale, rng);
        const Matrix b2 = gaussian(1, d, 0.5 * scale, rng);
        const Matrix bn = gaussian(1, d, 0.5 * scale, rng);
        Matrix pre = h * w1;
        pre.rowwise() += b1.row(0);
        Matrix z = h + pre.cwiseMax(0.0) * w2;
        z.rowwise() += b2.row(0) - bn.row(0);
        const Matrix d_prime = layer_norm_scaling(z, rng);
        rec.gamma = gamma_coefficient(d_prime, w1, w2);
        prefix *= rec.gamma;
        h = z * d_prime;
      }

      if (!rec.bound_ok) ++rep.violations;
      if (!(rec.alpha < 1.0)) ++rep.alpha_not_below_one;
      if (rec.bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, rec.capacity / rec.bound);
      trial.layers.push_back(rec);
    }
    rep.details.push_back(std::move(trial));
  }
  return rep;
}

nlohmann::json BoundReport::to_json(bool include_details) const {
  nlohmann::json j{{"theorem", theorem},         {"seed", seed},
                   {"trials", trials},           {"violations", violations},
                   {"alpha_not_below_one", alpha_not_below_one}, {"max_capacity_to_bound", max_ratio}};
  if (include_details) {
    auto arr = nlohmann::json::array();
    for (const auto& t : details) {
      auto layers = nlohmann::json::array();
      for (const auto& r : t.layers) {
        layers.push_back({{"layer", r.layer},
                          {"capacity", r.capacity},
                          {"bound", r.bound},
                          {"alpha", r.alpha},
                          {"lambda_raw", r.lambda_raw},
                          {"gamma", r.gamma},
                          {"bound_ok", r.bound_ok}});
      }
      arr.push_back({{"n", t.n}, {"m", t.m}, {"d", t.d}, {"depth", t.depth}, {"layers", std::move(layers)}});
    }
    j["details"] = std::move(arr);
  }
  return j;
}

namespace {

struct AlphaInstance {
  Matrix h, w, d;
  Vector b;
};

AlphaInstance adversarial_instance(int n, int d, Rng& rng) {
  AlphaInstance inst;
  inst.h = Matrix::Zero(n, d);
  inst.h.row(0) = gaussian(1, d, 1.0, rng);
  inst.w = kAdversarialValueScale * Matrix::Identity(d, d);
  inst.d = Matrix::Identity(d, d);
  inst.b = Vector::Zero(d);
  return inst;
}

AlphaInstance random_instance(int n, int d, const Matrix& a, Rng& rng) {
  AlphaInstance inst;
  inst.h = gaussian(n, d, 1.0, rng);
  inst.w = gaussian(d, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  inst.b = gaussian(d, 1, 0.5, rng).col(0);
  Matrix x = inst.h + a * inst.h * inst.w;
  x.rowwise() -= inst.b.transpose();
  inst.d = layer_norm_scaling(x, rng);
  return inst;
}

double alpha_of(const AlphaInstance& inst, const Matrix& a) {
  return alpha_coefficient(inst.h, a, inst.w, inst.b, inst.d);
}

// Co-membership sets for a random layout with blocks of size r_max.
std::vector<std::vector<int>> local_layout(int n, int m, int r_max, Rng& rng, std::vector<int>& block_of) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < n; i += r_max) {
    blocks.emplace_back(order.begin() + i, order.begin() + std::min(n, i + r_max));
  }
  block_of.assign(n, 0);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (int v : blocks[k]) block_of[v] = static_cast<int>(k);
  }
  std::vector<std::set<int>> co(n);
  for (int v = 0; v < n; ++v) co[v].insert(v);
  std::bernoulli_distribution coin(0.5);
  for (int s = 0; s < m; ++s) {
    const auto& blk = blocks[uniform_index(rng, blocks.size())];
    std::vector<int> members;
    for (int v : blk) {
      if (coin(rng)) members.push_back(v);
    }
    if (members.empty()) members.push_back(blk[uniform_index(rng, blk.size())]);
    for (int u : members) co[u].insert(members.begin(), members.end());
  }
  std::vector<std::vector<int>> out(n);
  for (int v = 0; v < n; ++v) out[v].assign(co[v].begin(), co[v].end());
  return out;
}

}  // namespace

LocalGlobalReport verify_theorem3(int n, int m, int r_max, int d, int trials, std::uint64_t seed) {
  if (n < 2 || r_max < 1 || r_max >= n || m < 1 || d < 1 || trials < 1) {
    throw std::invalid_argument("need n >= 2, 1 <= r_max < n, m >= 1, d >= 1, trials >= 1");
  }
  LocalGlobalReport rep;
  rep.n = n;
  rep.m = m;
  rep.r_max = r_max;
  rep.d = d;
  rep.trials = trials;
  rep.seed = seed;

  Rng base = split_rng(seed, {0});
  const AlphaInstance adv = adversarial_instance(n, d, base);

  // every node attends node 0
  Matrix a_global = Matrix::Zero(n, n);
  a_global.col(0).setOnes();
  rep.global_adversarial_alpha = alpha_of(adv, a_global);

  // strongest local analogue: node 0's block attends node 0, everyone else attends itself
  {
    Rng rng = split_rng(seed, {1});
    std::vector<int> block_of;
    local_layout(n, m, r_max, rng, block_of);
    Matrix a = Matrix::Identity(n, n);
    for (int v = 0; v < n; ++v) {
      if (block_of[v] == block_of[0]) {
        a.row(v).setZero();
        a(v, 0) = 1.0;
      }
    }
    rep.local_constructed_alpha = alpha_of(adv, a);
  }

  rep.global_random_min = std::numeric_limits<double>::infinity();
  rep.local_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng rng = split_rng(seed, {2, static_cast<std::uint64_t>(t)});
    std::vector<int> block_of;
    const auto co = local_layout(n, m, r_max, rng, block_of);
    Matrix a_local = Matrix::Zero(n, n);
    for (int v = 0; v < n; ++v) {
      const Vector w = simplex_point(static_cast<int>(co[v].size()), rng);
      for (std::size_t k = 0; k < co[v].size(); ++k) a_local(v, co[v][k]) = w(static_cast<Eigen::Index>(k));
    }
    rep.local_min = std::min(rep.local_min, alpha_of(adv, a_local));
    rep.local_min = std::min(rep.local_min, alpha_of(random_instance(n, d, a_local, rng), a_local));

    Matrix a_dense(n, n);
    for (int v = 0; v < n; ++v) a_dense.row(v) = simplex_point(n, rng).transpose();
    rep.global_random_min = std::min(rep.global_random_min, alpha_of(random_instance(n, d, a_dense, rng), a_dense));
  }
  rep.ordering_holds = rep.local_min > rep.global_adversarial_alpha;
  return rep;
}

nlohmann::json LocalGlobalReport::to_json() const {
  return {{"theorem", 3},
          {"n", n},
          {"m", m},
          {"r_max", r_max},
          {"d", d},
          {"trials", trials},
          {"seed", seed},
          {"global_adversarial_alpha", global_adversarial_alpha},
          {"global_random_min", global_random_min},
          {"global_min", std::min(global_adversarial_alpha, global_random_min)},
          {"local_min", local_min},
          {"local_constructed_alpha", local_constructed_alpha},
          {"ordering_holds", ordering_holds}};
}

}  // namespace deepgraph
