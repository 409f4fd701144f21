#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepgraph/model.hpp"
#include "deepgraph/substructure.hpp"
#include "deepgraph/training.hpp"

namespace deepgraph {

// ---------------------------------------------------------------------------
// Per-layer capacity curves for the masked model and its global-attention twin

struct CapacityCurve {
  std::vector<double> capacity;        // mean over heads, graphs and seeds; index = layer - 1
  std::vector<double> normalized;
  std::vector<double> token_capacity;  // masked variant only; empty otherwise
};

struct ReproResult {
  CapacityCurve masked;
  CapacityCurve unmasked;
  int seeds = 0;
  int graphs = 0;
};

/// For every seed, draws random weights for `cfg`, samples substructures per graph
/// and runs two forwards with the same weights: with locally masked substructure
/// tokens, and with node tokens only. Capacity at layer l uses that layer's input.
ReproResult repro_capacity(const std::vector<Graph>& graphs, const std::vector<SubstructureSet>& sets,
                           const ModelConfig& cfg, int seeds, std::uint64_t seed, int thre = 1);

/// Same measurement with explicit weights, one entry per seed.
ReproResult repro_capacity(const std::vector<Graph>& graphs, const std::vector<SubstructureSet>& sets,
                           const std::vector<ModelParams>& models, std::uint64_t seed, int thre = 1);

/// Per-layer report for a single trained model over a dataset.
CapacityCurve measure_capacity(const ModelParams& p, const std::vector<Graph>& graphs,
                               const std::vector<SubstructureSet>& sets, std::uint64_t seed, int thre = 1);

// ---------------------------------------------------------------------------
// Ablations

enum class Variant { full, no_local_attention, no_substructure_encoding, no_deepnorm };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

/// Applies a variant to copies of the base configurations.
void apply_variant(Variant v, ModelConfig& model, TrainConfig& train);

struct AblationRow {
  Variant variant = Variant::full;
  std::uint64_t seed = 0;
  double train_loss = 0.0;
  double eval_metric = 0.0;
};

/// Trains every variant for every seed on the same split. Model weights and
/// training streams are seeded by the row seed.
std::vector<AblationRow> run_ablation(const Dataset& train_set, const Dataset& eval_set, const ModelConfig& model,
                                      const TrainConfig& train, const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds);

}  // namespace deepgraph
