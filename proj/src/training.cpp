#include "deepgraph/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deepgraph/errors.hpp"

namespace deepgraph {

namespace {

void check_labels(const Graph& g, int classes) {
  if (static_cast<int>(g.node_labels.size()) != g.num_nodes) throw DataError("graph has no per-node labels");
  for (int y : g.node_labels) {
    if (y < 0 || y >= classes) throw DataError("node label " + std::to_string(y) + " outside class range");
  }
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double mx = out.row(i).maxCoeff();
    const double lse = mx + std::log((out.row(i).array() - mx).exp().sum());
    out.row(i).array() -= lse;
  }
  return out;
}

}  // namespace

double loss(const Prediction& pred, const Graph& g, Task task) {
  if (task == Task::graph_regression) {
    if (!g.target) throw DataError("graph has no regression target");
    return std::abs(pred.value - *g.target);
  }
  check_labels(g, static_cast<int>(pred.logits.cols()));
  Matrix lp = log_softmax_rows(pred.logits);
  double total = 0.0;
  for (int i = 0; i < g.num_nodes; ++i) total -= lp(i, g.node_labels[i]);
  return total / g.num_nodes;
}

Prediction loss_gradient(const Prediction& pred, const Graph& g, Task task) {
  Prediction d;
  if (task == Task::graph_regression) {
    if (!g.target) throw DataError("graph has no regression target");
    const double r = pred.value - *g.target;
    d.value = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    return d;
  }
  check_labels(g, static_cast<int>(pred.logits.cols()));
  d.logits = log_softmax_rows(pred.logits).array().exp().matrix();
  for (int i = 0; i < g.num_nodes; ++i) d.logits(i, g.node_labels[i]) -= 1.0;
  d.logits /= static_cast<double>(g.num_nodes);
  return d;
}

std::optional<std::string> TrainConfig::check() const {
  if (epochs < 0 || batch_size < 1) return "epochs must be >= 0 and batch_size >= 1";
  if (!(lr_peak > 0.0)) return "lr_peak must be positive";
  if (warmup_steps < 0) return "warmup_steps must be >= 0";
  if (total_steps > 0 && warmup_steps > total_steps) return "warmup_steps must not exceed total_steps";
  if (sampler_thre < 1) return "sampler thre must be >= 1";
  return std::nullopt;
}

double learning_rate(long step, double lr_peak, long warmup_steps, long total_steps) {
  if (step <= warmup_steps && warmup_steps > 0) {
    return lr_peak * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  if (step >= total_steps) return 0.0;
  return lr_peak * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup_steps);
}

AdamState adam_init(const ModelParams& p) {
  AdamState s{p.zeros_like(), p.zeros_like(), 0};
  return s;
}

double adam_step(ModelParams& p, const Gradients& g, AdamState& state, long step, const TrainConfig& cfg) {
  if (step < 1) throw std::invalid_argument("adam step must be >= 1");
  const double lr = learning_rate(step, cfg.lr_peak, cfg.warmup_steps, cfg.total_steps);
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  auto params = p.tensors();
  auto grads = g.tensors();
  auto ms = state.m.tensors();
  auto vs = state.v.tensors();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].first == "embed.sub.random") continue;
    auto& m = *ms[i].second;
    auto& v = *vs[i].second;
    const auto& gr = *grads[i].second;
    if (!gr.allFinite()) throw NumericError("non-finite gradient in " + params[i].first);
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * gr;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * gr.cwiseAbs2();
    params[i].second->array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
  }
  state.step = step;
  return lr;
}

TokenBatch prepare_batch(const Graph& g, const SubstructureSet& set, const DistanceTable& dist,
                         const TrainConfig& cfg, int s_max, Rng& rng) {
  std::vector<Substructure> chosen;
  if (cfg.substructure_tokens && !set.empty()) {
    auto params = SamplerParams::defaults_for(g.num_nodes, cfg.sampler_thre);
    for (int idx : sample_substructures(set, g.num_nodes, params, rng)) chosen.push_back(set.items[idx]);
  }
  TokenOptions opts;
  opts.local_mask = cfg.local_mask;
  opts.s_max = s_max;
  return build_tokens(g, chosen, dist, rng, opts);
}

namespace {

std::vector<DistanceTable> distances_for(const Dataset& data) {
  std::vector<DistanceTable> out;
  out.reserve(data.graphs.size());
  for (const auto& g : data.graphs) out.push_back(all_pairs_distances(g));
  return out;
}

const SubstructureSet& set_for(const Dataset& data, std::size_t i) {
  static const SubstructureSet kEmpty{};
  return i < data.substructures.size() ? data.substructures[i] : kEmpty;
}

double metric_on(const ModelParams& p, const Dataset& data, const std::vector<DistanceTable>& dist,
                 const TrainConfig& cfg, std::uint64_t epoch_seed) {
  if (data.graphs.empty()) return 0.0;
  double total = 0.0;
  long nodes = 0;
  for (std::size_t i = 0; i < data.graphs.size(); ++i) {
    const auto& g = data.graphs[i];
    Rng rng = split_rng(epoch_seed, {i, 2});
    auto batch = prepare_batch(g, set_for(data, i), dist[i], cfg, p.config.s_max, rng);
    auto pred = model_forward(batch, p);
    if (cfg.task == Task::graph_regression) {
      total += loss(pred, g, cfg.task);
    } else {
      for (int v = 0; v < g.num_nodes; ++v) {
        Eigen::Index arg = 0;
        pred.logits.row(v).maxCoeff(&arg);
        total += static_cast<int>(arg) == g.node_labels.at(v) ? 1.0 : 0.0;
      }
      nodes += g.num_nodes;
    }
  }
  return cfg.task == Task::graph_regression ? total / static_cast<double>(data.graphs.size())
                                            : total / static_cast<double>(std::max(1L, nodes));
}

}  // namespace

double evaluate(const ModelParams& p, const Dataset& data, const TrainConfig& cfg, std::uint64_t epoch_seed) {
  return metric_on(p, data, distances_for(data), cfg, epoch_seed);
}

std::vector<EpochRecord> train(ModelParams& p, const Dataset& train_set, const Dataset* eval_set,
                               const TrainConfig& cfg_in, const EpochCallback& on_epoch) {
  TrainConfig cfg = cfg_in;
  const long batches = (static_cast<long>(train_set.graphs.size()) + cfg.batch_size - 1) / cfg.batch_size;
  if (cfg.total_steps <= 0) cfg.total_steps = static_cast<int>(std::max(1L, cfg.epochs * batches));
  if (cfg.warmup_steps > cfg.total_steps) cfg.warmup_steps = cfg.total_steps;
  if (auto bad = cfg.check()) throw std::invalid_argument(*bad);
  if (p.config.task != cfg.task) throw std::invalid_argument("model task and training task differ");

  const auto train_dist = distances_for(train_set);
  std::vector<DistanceTable> eval_dist;
  if (eval_set) eval_dist = distances_for(*eval_set);

  AdamState state = adam_init(p);
  std::vector<EpochRecord> log;
  std::vector<std::size_t> order(train_set.graphs.size());
  long step = 0;
  double lr = 0.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = split_rng(cfg.seed, {static_cast<std::uint64_t>(epoch), 0xA11CE});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      Gradients acc = p.zeros_like();
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto& g = train_set.graphs[i];
        Rng rng = split_rng(cfg.seed, {static_cast<std::uint64_t>(epoch), i, 1});
        auto batch = prepare_batch(g, set_for(train_set, i), train_dist[i], cfg, p.config.s_max, rng);
        ForwardTrace trace;
        auto pred = model_forward(batch, p, &trace);
        loss_sum += loss(pred, g, cfg.task);
        acc.add_scaled(backward(trace, p, batch, loss_gradient(pred, g, cfg.task)), inv);
      }
      ++step;
      if (step <= cfg.total_steps) lr = adam_step(p, acc, state, step, cfg);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = train_set.graphs.empty() ? 0.0 : loss_sum / static_cast<double>(train_set.graphs.size());
    const std::uint64_t eval_seed = cfg.seed ^ (0xE7A1ULL * static_cast<std::uint64_t>(epoch));
    rec.eval_metric = eval_set ? metric_on(p, *eval_set, eval_dist, cfg, eval_seed)
                               : metric_on(p, train_set, train_dist, cfg, eval_seed);
    log.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return log;
}

}  // namespace deepgraph
