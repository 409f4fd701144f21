#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deepgraph/model.hpp"
#include "deepgraph/sampler.hpp"
#include "deepgraph/substructure.hpp"

namespace deepgraph {

/// Mean absolute error for graph regression, mean node cross-entropy for node
/// classification. Throws DataError on a missing target or out-of-range label.
double loss(const Prediction& pred, const Graph& g, Task task);

/// d loss / d prediction. For regression `value` holds the derivative (sign of
/// the residual, 0 at equality); for classification `logits` does.
Prediction loss_gradient(const Prediction& pred, const Graph& g, Task task);

/// Reverse pass given the gradient of the loss w.r.t. the prediction.
Gradients backward(const ForwardTrace& trace, const ModelParams& p, const TokenBatch& batch,
                   const Prediction& d_pred);

/// Reverse pass with the loss against the graph's own target.
Gradients backward(const ForwardTrace& trace, const ModelParams& p, const TokenBatch& batch, const Graph& target);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double lr_peak = 1e-3;
  int warmup_steps = 100;
  int total_steps = 0;  // 0: epochs * batches per epoch
  std::uint64_t seed = 0;
  Task task = Task::graph_regression;
  /// Substructure tokens on/off and whether they use the local mask.
  bool substructure_tokens = true;
  bool local_mask = true;
  int sampler_thre = 1;

  std::optional<std::string> check() const;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// Linear warm-up to lr_peak at warmup_steps, then linear decay to 0 at total_steps.
double learning_rate(long step, double lr_peak, long warmup_steps, long total_steps);

AdamState adam_init(const ModelParams& p);

/// One Adam update at `step` (>= 1). Returns the learning rate used.
double adam_step(ModelParams& p, const Gradients& g, AdamState& state, long step, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double eval_metric = 0.0;  // MAE for regression, accuracy for node classification
  double lr = 0.0;
};

struct Dataset {
  std::vector<Graph> graphs;
  std::vector<SubstructureSet> substructures;  // aligned with graphs
};

/// Samples substructures and builds the token batch for one graph. Streams are
/// keyed by (seed, epoch, graph index) so results do not depend on visit order.
TokenBatch prepare_batch(const Graph& g, const SubstructureSet& set, const DistanceTable& dist,
                         const TrainConfig& cfg, int s_max, Rng& rng);

/// Mean loss-derived metric on `data` with substructures sampled from `epoch_seed`.
double evaluate(const ModelParams& p, const Dataset& data, const TrainConfig& cfg, std::uint64_t epoch_seed);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam training; substructures are resampled every epoch.
std::vector<EpochRecord> train(ModelParams& p, const Dataset& train_set, const Dataset* eval_set,
                               const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace deepgraph
