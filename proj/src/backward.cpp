#include <cmath>

#include "deepgraph/errors.hpp"
#include "deepgraph/training.hpp"

namespace deepgraph {

namespace {

// Reverse of deepnorm_ln. Returns d(eta*x + f_x); accumulates gain/bias grads.
Matrix ln_backward(const Matrix& dy, const LayerNormCache& c, const Matrix& gain, Matrix& dgain, Matrix& dbias) {
  dgain.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  Matrix dxhat = dy;
  dxhat.array().rowwise() *= gain.row(0).array();
  const double d = static_cast<double>(dy.cols());
  Vector mean_dxhat = dxhat.rowwise().sum() / d;
  Vector mean_dxhat_xhat = (dxhat.array() * c.xhat.array()).rowwise().sum().matrix() / d;
  Matrix du = dxhat;
  du.colwise() -= mean_dxhat;
  du -= (c.xhat.array().colwise() * mean_dxhat_xhat.array()).matrix();
  du.array().colwise() *= c.inv_std.array();
  return du;
}

}  // namespace

Gradients backward(const ForwardTrace& tr, const ModelParams& p, const TokenBatch& batch, const Prediction& d_pred) {
  const auto& cfg = p.config;
  const int n = batch.n;
  const int t = batch.tokens();
  const int dk = cfg.d_head;
  const double eta = cfg.eta();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Gradients g = p.zeros_like();

  // readout
  Matrix dh = Matrix::Zero(t, cfg.d_model);
  if (cfg.task == Task::graph_regression) {
    const double dv = d_pred.value;
    g.head_w.col(0) += dv * tr.pooled.transpose();
    g.head_b(0, 0) += dv;
    Eigen::RowVectorXd dpooled = dv * p.head_w.col(0).transpose() / static_cast<double>(n);
    dh.topRows(n).rowwise() += dpooled;
  } else {
    const Matrix hn = tr.final_hidden.topRows(n);
    g.head_w += hn.transpose() * d_pred.logits;
    g.head_b.row(0) += d_pred.logits.colwise().sum();
    dh.topRows(n) += d_pred.logits * p.head_w.transpose();
  }

  std::vector<Matrix> dbias(cfg.heads, Matrix::Zero(t, t));
  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const auto& lp = p.layers[l];
    const auto& lt = tr.layers[l];
    auto& gl = g.layers[l];

    // FFN sublayer
    Matrix du2 = ln_backward(dh, lt.ln2, lp.ln2_gain, gl.ln2_gain, gl.ln2_bias);
    Matrix dx1 = eta * du2;
    gl.w2.noalias() += lt.ffn_act.transpose() * du2;
    gl.b2.row(0) += du2.colwise().sum();
    Matrix dpre = du2 * lp.w2.transpose();
    dpre.array() *= (lt.ffn_pre.array() > 0.0).cast<double>();
    gl.w1.noalias() += lt.x1.transpose() * dpre;
    gl.b1.row(0) += dpre.colwise().sum();
    dx1.noalias() += dpre * lp.w1.transpose();

    // attention sublayer
    Matrix du1 = ln_backward(dx1, lt.ln1, lp.ln1_gain, gl.ln1_gain, gl.ln1_bias);
    Matrix dh_in = eta * du1;
    gl.wo.noalias() += lt.concat.transpose() * du1;
    Matrix dconcat = du1 * lp.wo.transpose();
    for (int hd = 0; hd < cfg.heads; ++hd) {
      const Matrix& a = lt.attn[hd];
      Matrix dout = dconcat.middleCols(hd * dk, dk);
      Matrix da = dout * lt.v[hd].transpose();
      Matrix dv = a.transpose() * dout;
      Vector row_dot = (da.array() * a.array()).rowwise().sum();
      Matrix ds = a.array() * (da.colwise() - row_dot).array();
      dbias[hd] += ds;
      Matrix dq = scale * (ds * lt.k[hd]);
      Matrix dkm = scale * (ds.transpose() * lt.q[hd]);
      gl.wq.middleCols(hd * dk, dk).noalias() += lt.h_in.transpose() * dq;
      gl.wk.middleCols(hd * dk, dk).noalias() += lt.h_in.transpose() * dkm;
      gl.wv.middleCols(hd * dk, dk).noalias() += lt.h_in.transpose() * dv;
      dh_in.noalias() += dq * lp.wq.middleCols(hd * dk, dk).transpose();
      dh_in.noalias() += dkm * lp.wk.middleCols(hd * dk, dk).transpose();
      dh_in.noalias() += dv * lp.wv.middleCols(hd * dk, dk).transpose();
    }
    dh = std::move(dh_in);
  }

  // relative-position bias tables
  for (int hd = 0; hd < cfg.heads; ++hd) {
    const Matrix& db = dbias[hd];
    for (int j = 0; j < t; ++j) {
      for (int i = 0; i < t; ++i) g.dist_bias(hd, batch.dist_ids(i, j)) += db(i, j);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto& feats = batch.sp_edge_feats[static_cast<std::size_t>(i) * n + j];
        if (feats.empty()) continue;
        const double share = db(i, j) / static_cast<double>(feats.size());
        for (int f : feats) g.edge_bias(hd, f) += share;
      }
    }
  }

  // embeddings; the random substructure table is fixed
  for (int i = 0; i < n; ++i) g.node_embed.row(batch.node_feat_ids[i]) += dh.row(i);
  if (cfg.structural_encoding) {
    for (int s = 0; s < batch.m; ++s) {
      const auto& flat = batch.canon_forms[s].flat_adj;
      const auto row = dh.row(n + s);
      g.sub_b.row(0) += row;
      for (int k = 0; k < cfg.flat_dim(); ++k) {
        if (flat[k]) g.sub_w.row(k) += row;
      }
    }
  }
  return g;
}

Gradients backward(const ForwardTrace& trace, const ModelParams& p, const TokenBatch& batch, const Graph& target) {
  Prediction pred;
  if (p.config.task == Task::graph_regression) {
    pred.value = (trace.pooled * p.head_w)(0, 0) + p.head_b(0, 0);
  } else {
    pred.logits = trace.final_hidden.topRows(batch.n) * p.head_w;
    pred.logits.rowwise() += p.head_b.row(0);
  }
  return backward(trace, p, batch, loss_gradient(pred, target, p.config.task));
}

}  // namespace deepgraph
