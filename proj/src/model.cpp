#include "deepgraph/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "deepgraph/errors.hpp"

namespace deepgraph {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix gaussian(int rows, int cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

Matrix xavier(int fan_in, int fan_out, double gain, Rng& rng) {
  return gaussian(fan_in, fan_out, gain * std::sqrt(2.0 / (fan_in + fan_out)), rng);
}

}  // namespace

double ModelConfig::eta() const { return deepnorm ? std::pow(2.0 * num_layers, 0.25) : 1.0; }

double ModelConfig::beta() const {
  return deepnorm && num_layers > 0 ? std::pow(8.0 * num_layers, -0.25) : 1.0;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out{
      {"embed.node", &node_embed}, {"embed.sub.w", &sub_w}, {"embed.sub.b", &sub_b}};
  if (sub_random.size() > 0) out.emplace_back("embed.sub.random", &sub_random);
  out.emplace_back("bias.dist", &dist_bias);
  out.emplace_back("bias.edge", &edge_bias);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string pre = "layer." + std::to_string(l) + ".";
    auto& lp = layers[l];
    out.emplace_back(pre + "wq", &lp.wq);
    out.emplace_back(pre + "wk", &lp.wk);
    out.emplace_back(pre + "wv", &lp.wv);
    out.emplace_back(pre + "wo", &lp.wo);
    out.emplace_back(pre + "ln1.gain", &lp.ln1_gain);
    out.emplace_back(pre + "ln1.bias", &lp.ln1_bias);
    out.emplace_back(pre + "ffn.w1", &lp.w1);
    out.emplace_back(pre + "ffn.b1", &lp.b1);
    out.emplace_back(pre + "ffn.w2", &lp.w2);
    out.emplace_back(pre + "ffn.b2", &lp.b2);
    out.emplace_back(pre + "ln2.gain", &lp.ln2_gain);
    out.emplace_back(pre + "ln2.bias", &lp.ln2_bias);
  }
  out.emplace_back("head.w", &head_w);
  out.emplace_back("head.b", &head_b);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.reserve(mut.size());
  for (auto& [name, ptr] : mut) out.emplace_back(std::move(name), ptr);
  return out;
}

Matrix ModelParams::wvo(int layer, int head) const {
  const auto& lp = layers.at(layer);
  const int dk = config.d_head;
  return lp.wv.middleCols(head * dk, dk) * lp.wo.middleRows(head * dk, dk);
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& [name, m] : z.tensors()) m->setZero();
  return z;
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  auto mine = tensors();
  auto theirs = other.tensors();
  if (mine.size() != theirs.size()) throw std::invalid_argument("parameter trees differ");
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += scale * *theirs[i].second;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, m] : tensors()) total += static_cast<std::size_t>(m->size());
  return total;
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
  if (cfg.num_layers < 0 || cfg.heads < 1 || cfg.d_model < 1 || cfg.d_head < 1 || cfg.d_ffn < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  const int d = cfg.d_model;
  const int hd = cfg.heads * cfg.d_head;
  const double beta = cfg.beta();
  ModelParams p;
  p.config = cfg;
  p.node_embed = gaussian(cfg.node_vocab, d, 1.0, rng);
  p.sub_w = xavier(cfg.flat_dim(), d, 1.0, rng);
  p.sub_b = gaussian(1, d, 1.0, rng);
  if (!cfg.structural_encoding) p.sub_random = gaussian(cfg.random_embed_rows, d, 1.0, rng);
  p.dist_bias = gaussian(cfg.heads, kDistBuckets, cfg.bias_init_std, rng);
  p.edge_bias = gaussian(cfg.heads, cfg.edge_vocab, cfg.bias_init_std, rng);
  p.layers.resize(cfg.num_layers);
  for (auto& lp : p.layers) {
    lp.wq = xavier(d, hd, 1.0, rng);
    lp.wk = xavier(d, hd, 1.0, rng);
    lp.wv = xavier(d, hd, beta, rng);
    lp.wo = xavier(hd, d, beta, rng);
    lp.ln1_gain = Matrix::Ones(1, d);
    lp.ln1_bias = Matrix::Zero(1, d);
    lp.w1 = xavier(d, cfg.d_ffn, beta, rng);
    lp.b1 = Matrix::Zero(1, cfg.d_ffn);
    lp.w2 = xavier(cfg.d_ffn, d, beta, rng);
    lp.b2 = Matrix::Zero(1, d);
    lp.ln2_gain = Matrix::Ones(1, d);
    lp.ln2_bias = Matrix::Zero(1, d);
  }
  p.head_w = xavier(d, cfg.output_dim(), 1.0, rng);
  p.head_b = Matrix::Zero(1, cfg.output_dim());
  return p;
}

TokenBatch build_tokens(const Graph& g, const std::vector<Substructure>& chosen, const DistanceTable& d, Rng& rng,
                        const TokenOptions& opts) {
  const int n = g.num_nodes;
  const int m = static_cast<int>(chosen.size());
  const int t = n + m;
  TokenBatch b;
  b.n = n;
  b.m = m;
  b.node_feat_ids = g.node_feat;
  b.membership.reserve(m);
  for (const auto& s : chosen) {
    if (s.nodes.empty()) throw DataError("empty substructure token");
    for (int v : s.nodes) {
      if (v < 0 || v >= n) throw DataError("substructure references node outside the graph");
    }
    b.membership.push_back(s.nodes);
    b.canon_forms.push_back(canonicalize(s, rng, opts.s_max));
  }

  b.mask = Matrix::Zero(t, t);
  if (opts.local_mask) {
    for (int s = 0; s < m; ++s) {
      const int tok = n + s;
      b.mask.row(tok).setConstant(kNegInf);
      b.mask.col(tok).setConstant(kNegInf);
      for (int v : b.membership[s]) {
        b.mask(tok, v) = 0.0;
        b.mask(v, tok) = 0.0;
      }
    }
  }

  b.dist_ids = Eigen::MatrixXi::Constant(t, t, kSubtokenBucket);
  b.sp_edge_feats.assign(static_cast<std::size_t>(n) * n, {});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!d.reachable(i, j)) {
        b.dist_ids(i, j) = kUnreachableBucket;
        continue;
      }
      b.dist_ids(i, j) = std::min(d.distance(i, j), kMaxDistBucket - 1);
      auto& feats = b.sp_edge_feats[static_cast<std::size_t>(i) * n + j];
      for (int e : d.path(i, j)) feats.push_back(g.edge_feat[e]);
    }
  }
  return b;
}

Matrix deepnorm_ln(const Matrix& x, const Matrix& f_x, const Matrix& gain, const Matrix& bias, double eta,
                   LayerNormCache* cache) {
  if (!(eta > 0.0)) throw std::invalid_argument("deepnorm eta must be positive");
  Matrix u = eta * x + f_x;
  const Eigen::Index d = u.cols();
  Vector mean = u.rowwise().mean();
  u.colwise() -= mean;
  Vector inv_std = ((u.array().square().rowwise().sum() / static_cast<double>(d)) + kLayerNormEps).rsqrt();
  u.array().colwise() *= inv_std.array();
  Matrix y = u;
  y.array().rowwise() *= gain.row(0).array();
  y.rowwise() += bias.row(0);
  if (cache) {
    cache->xhat = std::move(u);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

std::vector<Matrix> structural_bias(const ModelParams& p, const TokenBatch& batch) {
  const int t = batch.tokens();
  const int n = batch.n;
  std::vector<Matrix> out(p.config.heads, Matrix(t, t));
  for (int h = 0; h < p.config.heads; ++h) {
    Matrix& b = out[h];
    for (int j = 0; j < t; ++j) {
      for (int i = 0; i < t; ++i) b(i, j) = p.dist_bias(h, batch.dist_ids(i, j));
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto& feats = batch.sp_edge_feats[static_cast<std::size_t>(i) * n + j];
        if (feats.empty()) continue;
        double sum = 0.0;
        for (int f : feats) {
          if (f < 0 || f >= p.config.edge_vocab) throw DataError("edge feature outside edge vocabulary");
          sum += p.edge_bias(h, f);
        }
        b(i, j) += sum / static_cast<double>(feats.size());
      }
    }
  }
  return out;
}

Matrix masked_softmax(const Matrix& scores, const Matrix& mask) {
  const Eigen::Index t = scores.rows();
  Matrix a(t, scores.cols());
  for (Eigen::Index i = 0; i < t; ++i) {
    double mx = kNegInf;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (std::isfinite(mask(i, j))) mx = std::max(mx, scores(i, j));
    }
    if (mx == kNegInf) {
      // no unmasked entry; cannot happen for batches from build_tokens
      a.row(i).setConstant(1.0 / static_cast<double>(scores.cols()));
      continue;
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const double e = std::isfinite(mask(i, j)) ? std::exp(scores(i, j) - mx) : 0.0;
      a(i, j) = e;
      sum += e;
    }
    a.row(i) /= sum;
  }
  return a;
}

Matrix attention_forward(const Matrix& h, const LayerParams& lp, const ModelConfig& cfg, const TokenBatch& batch,
                         const std::vector<Matrix>& bias, LayerTrace& tr) {
  const int dk = cfg.d_head;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  tr.h_in = h;
  tr.q.resize(cfg.heads);
  tr.k.resize(cfg.heads);
  tr.v.resize(cfg.heads);
  tr.attn.resize(cfg.heads);
  tr.concat.resize(h.rows(), cfg.heads * dk);
  for (int hd = 0; hd < cfg.heads; ++hd) {
    tr.q[hd].noalias() = h * lp.wq.middleCols(hd * dk, dk);
    tr.k[hd].noalias() = h * lp.wk.middleCols(hd * dk, dk);
    tr.v[hd].noalias() = h * lp.wv.middleCols(hd * dk, dk);
    Matrix scores = scale * (tr.q[hd] * tr.k[hd].transpose()) + bias[hd];
    tr.attn[hd] = masked_softmax(scores, batch.mask);
    tr.concat.middleCols(hd * dk, dk).noalias() = tr.attn[hd] * tr.v[hd];
  }
  tr.attn_out.noalias() = tr.concat * lp.wo;
  tr.x1 = deepnorm_ln(h, tr.attn_out, lp.ln1_gain, lp.ln1_bias, cfg.eta(), &tr.ln1);
  return tr.x1;
}

Matrix embed_tokens(const ModelParams& p, const TokenBatch& batch) {
  const auto& cfg = p.config;
  Matrix h(batch.tokens(), cfg.d_model);
  for (int i = 0; i < batch.n; ++i) {
    const int f = batch.node_feat_ids[i];
    if (f < 0 || f >= cfg.node_vocab) throw DataError("node feature outside node vocabulary");
    h.row(i) = p.node_embed.row(f);
  }
  for (int s = 0; s < batch.m; ++s) {
    if (cfg.structural_encoding) {
      const auto& flat = batch.canon_forms[s].flat_adj;
      if (static_cast<int>(flat.size()) != cfg.flat_dim()) throw DataError("canonical form width mismatch");
      Eigen::RowVectorXd row = p.sub_b.row(0);
      for (int k = 0; k < cfg.flat_dim(); ++k) {
        if (flat[k]) row += p.sub_w.row(k);
      }
      h.row(batch.n + s) = row;
    } else {
      h.row(batch.n + s) = p.sub_random.row(s % p.sub_random.rows());
    }
  }
  return h;
}

Prediction model_forward(const TokenBatch& batch, const ModelParams& p, ForwardTrace* trace) {
  const auto& cfg = p.config;
  if (batch.n < 1) throw DataError("graph has no nodes");
  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;
  tr.input = embed_tokens(p, batch);
  tr.structural_bias = structural_bias(p, batch);
  tr.layers.assign(cfg.num_layers, {});
  const double eta = cfg.eta();

  Matrix h = tr.input;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const auto& lp = p.layers[l];
    auto& lt = tr.layers[l];
    Matrix x1 = attention_forward(h, lp, cfg, batch, tr.structural_bias, lt);
    lt.ffn_pre.noalias() = x1 * lp.w1;
    lt.ffn_pre.rowwise() += lp.b1.row(0);
    lt.ffn_act = lt.ffn_pre.cwiseMax(0.0);
    lt.ffn_out.noalias() = lt.ffn_act * lp.w2;
    lt.ffn_out.rowwise() += lp.b2.row(0);
    lt.h_out = deepnorm_ln(x1, lt.ffn_out, lp.ln2_gain, lp.ln2_bias, eta, &lt.ln2);
    h = lt.h_out;
  }
  tr.final_hidden = h;

  Prediction pred;
  if (cfg.task == Task::graph_regression) {
    tr.pooled = h.topRows(batch.n).colwise().mean();
    pred.value = (tr.pooled * p.head_w)(0, 0) + p.head_b(0, 0);
  } else {
    pred.logits = h.topRows(batch.n) * p.head_w;
    pred.logits.rowwise() += p.head_b.row(0);
  }
  return pred;
}

Prediction model_forward(const Graph& g, const std::vector<Substructure>& chosen, const ModelParams& p, Rng& rng,
                         ForwardTrace* trace, const TokenOptions& opts) {
  TokenOptions o = opts;
  o.s_max = p.config.s_max;
  auto dist = all_pairs_distances(g);
  auto batch = build_tokens(g, chosen, dist, rng, o);
  return model_forward(batch, p, trace);
}

}  // namespace deepgraph
