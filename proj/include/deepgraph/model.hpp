#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "deepgraph/canonical.hpp"
#include "deepgraph/graph.hpp"
#include "deepgraph/rng.hpp"
#include "deepgraph/substructure.hpp"

namespace deepgraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Task { graph_regression, node_classification };

// Distance buckets: 0..63 hop distances, then unreachable, then any pair
// involving a substructure token.
inline constexpr int kUnreachableBucket = kMaxDistBucket;
inline constexpr int kSubtokenBucket = kMaxDistBucket + 1;
inline constexpr int kDistBuckets = kMaxDistBucket + 2;

inline constexpr double kLayerNormEps = 1e-5;

struct ModelConfig {
  int num_layers = 4;
  int heads = 4;
  int d_model = 32;
  int d_head = 8;
  int d_ffn = 64;
  int node_vocab = 16;
  int edge_vocab = 8;
  int s_max = kDefaultSMax;
  Task task = Task::graph_regression;
  int num_classes = 2;
  /// Residual scale eta = (2L)^(1/4) and init downscale beta = (8L)^(-1/4); both 1 when off.
  bool deepnorm = true;
  /// When off, substructure tokens get a fixed random embedding instead of g_s(adjacency).
  bool structural_encoding = true;
  int random_embed_rows = 64;
  double bias_init_std = 0.1;

  double eta() const;
  double beta() const;
  int output_dim() const { return task == Task::graph_regression ? 1 : num_classes; }
  int flat_dim() const { return flat_length(s_max); }
};

struct LayerParams {
  Matrix wq, wk, wv;      // d_model x heads*d_head
  Matrix wo;              // heads*d_head x d_model
  Matrix ln1_gain, ln1_bias;  // 1 x d_model
  Matrix w1, b1;          // d_model x d_ffn, 1 x d_ffn
  Matrix w2, b2;          // d_ffn x d_model, 1 x d_model
  Matrix ln2_gain, ln2_bias;
};

/// All learnable tensors. Gradients share this layout.
///
/// Parameter paths (checkpoint keys):
///   embed.node  embed.sub.w  embed.sub.b  embed.sub.random
///   bias.dist   bias.edge    head.w       head.b
///   layer.<l>.{wq,wk,wv,wo,ln1.gain,ln1.bias,ffn.w1,ffn.b1,ffn.w2,ffn.b2,ln2.gain,ln2.bias}
struct ModelParams {
  ModelConfig config;
  Matrix node_embed;   // node_vocab x d
  Matrix sub_w;        // flat_dim x d
  Matrix sub_b;        // 1 x d
  Matrix sub_random;   // random_embed_rows x d, fixed (never updated); empty when unused
  Matrix dist_bias;    // heads x kDistBuckets
  Matrix edge_bias;    // heads x edge_vocab
  Matrix head_w;       // d x output_dim
  Matrix head_b;       // 1 x output_dim
  std::vector<LayerParams> layers;

  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;

  /// Value-output product of one head, d_model x d_model.
  Matrix wvo(int layer, int head) const;

  ModelParams zeros_like() const;
  void add_scaled(const ModelParams& other, double scale);
  std::size_t parameter_count() const;
};

using Gradients = ModelParams;

ModelParams init_params(const ModelConfig& cfg, Rng& rng);

/// Transformer input: node tokens followed by substructure tokens.
struct TokenBatch {
  int n = 0;
  int m = 0;
  std::vector<int> node_feat_ids;
  std::vector<CanonicalForm> canon_forms;
  Matrix mask;                               // (n+m)^2, entries 0 or -inf
  Eigen::MatrixXi dist_ids;                  // (n+m)^2 bucket indices
  std::vector<std::vector<int>> sp_edge_feats;  // n*n, edge features along the stored shortest path
  std::vector<std::vector<int>> membership;  // per substructure token, sorted node indices

  int tokens() const { return n + m; }
};

struct TokenOptions {
  /// Substructure tokens see only their member nodes. When false every pair is unmasked.
  bool local_mask = true;
  int s_max = kDefaultSMax;
};

TokenBatch build_tokens(const Graph& g, const std::vector<Substructure>& chosen, const DistanceTable& d, Rng& rng,
                        const TokenOptions& opts = {});

struct LayerNormCache {
  Matrix xhat;
  Vector inv_std;
};

/// Row-wise standardisation of (eta * x + f_x) followed by gain and bias.
Matrix deepnorm_ln(const Matrix& x, const Matrix& f_x, const Matrix& gain, const Matrix& bias, double eta,
                   LayerNormCache* cache = nullptr);

struct LayerTrace {
  Matrix h_in;
  std::vector<Matrix> q, k, v;   // per head, T x d_head
  std::vector<Matrix> attn;      // per head, post-softmax T x T
  Matrix concat;                 // T x heads*d_head
  Matrix attn_out;               // concat * wo
  LayerNormCache ln1;
  Matrix x1;
  Matrix ffn_pre, ffn_act, ffn_out;
  LayerNormCache ln2;
  Matrix h_out;
};

struct ForwardTrace {
  Matrix input;                        // token embeddings
  std::vector<Matrix> structural_bias;  // per head, unmasked relative-position bias
  std::vector<LayerTrace> layers;
  Matrix final_hidden;
  Eigen::RowVectorXd pooled;           // graph task only
};

struct Prediction {
  double value = 0.0;  // graph regression
  Matrix logits;       // node classification, n x classes
};

/// Per-head relative-position bias: distance bucket bias plus mean edge bias along the path.
std::vector<Matrix> structural_bias(const ModelParams& p, const TokenBatch& batch);

/// Row-wise softmax of scores + mask; masked entries are exactly 0.
Matrix masked_softmax(const Matrix& scores, const Matrix& mask);

/// Masked multi-head attention followed by deepnorm LN. Fills `trace` from h_in to x1.
Matrix attention_forward(const Matrix& h, const LayerParams& lp, const ModelConfig& cfg, const TokenBatch& batch,
                         const std::vector<Matrix>& bias, LayerTrace& trace);

Matrix embed_tokens(const ModelParams& p, const TokenBatch& batch);

Prediction model_forward(const TokenBatch& batch, const ModelParams& p, ForwardTrace* trace = nullptr);

/// Convenience path: distances, canonical forms and tokens built on the fly.
Prediction model_forward(const Graph& g, const std::vector<Substructure>& chosen, const ModelParams& p, Rng& rng,
                         ForwardTrace* trace = nullptr, const TokenOptions& opts = {});

}  // namespace deepgraph
