#include "deepgraph/experiments.hpp"

#include <stdexcept>

#include "deepgraph/capacity.hpp"
#include "deepgraph/sampler.hpp"

namespace deepgraph {

namespace {

std::vector<Substructure> sample_for(const Graph& g, const SubstructureSet& set, int thre, Rng& rng) {
  std::vector<Substructure> chosen;
  if (set.empty()) return chosen;
  auto params = SamplerParams::defaults_for(g.num_nodes, thre);
  for (int idx : sample_substructures(set, g.num_nodes, params, rng)) chosen.push_back(set.items[idx]);
  return chosen;
}

struct CurveSum {
  std::vector<double> capacity, normalized, token;
  std::vector<int> count, token_count;

  explicit CurveSum(int layers)
      : capacity(layers, 0.0), normalized(layers, 0.0), token(layers, 0.0), count(layers, 0), token_count(layers, 0) {}

  void add(const ForwardTrace& tr, const Matrix& e, const ModelParams& p, int n, bool tokens) {
    for (int l = 0; l < p.config.num_layers; ++l) {
      capacity[l] += layer_capacity(tr, e, p, l).mean;
      normalized[l] += normalized_capacity(tr, e, p, l).mean;
      ++count[l];
      if (tokens) {
        token[l] += token_capacity(tr, p, l, n).mean;
        ++token_count[l];
      }
    }
  }

  CapacityCurve finish(bool tokens) const {
    CapacityCurve c;
    for (std::size_t l = 0; l < capacity.size(); ++l) {
      const double k = count[l] > 0 ? static_cast<double>(count[l]) : 1.0;
      c.capacity.push_back(capacity[l] / k);
      c.normalized.push_back(normalized[l] / k);
      if (tokens) c.token_capacity.push_back(token_count[l] > 0 ? token[l] / token_count[l] : 0.0);
    }
    return c;
  }
};

Matrix basis_of(int n, const std::vector<Substructure>& chosen) {
  std::vector<std::vector<int>> members;
  for (const auto& s : chosen) members.push_back(s.nodes);
  return pattern_basis(n, members);
}

const SubstructureSet& set_at(const std::vector<SubstructureSet>& sets, std::size_t i) {
  if (i >= sets.size()) throw std::invalid_argument("substructure cache does not cover every graph");
  return sets[i];
}

}  // namespace

ReproResult repro_capacity(const std::vector<Graph>& graphs, const std::vector<SubstructureSet>& sets,
                           const ModelConfig& cfg, int seeds, std::uint64_t seed, int thre) {
  if (seeds < 1) throw std::invalid_argument("need at least one seed");
  std::vector<ModelParams> models;
  for (int s = 0; s < seeds; ++s) {
    Rng init_rng = split_rng(seed, {static_cast<std::uint64_t>(s), 0});
    models.push_back(init_params(cfg, init_rng));
  }
  return repro_capacity(graphs, sets, models, seed, thre);
}

ReproResult repro_capacity(const std::vector<Graph>& graphs, const std::vector<SubstructureSet>& sets,
                           const std::vector<ModelParams>& models, std::uint64_t seed, int thre) {
  if (models.empty()) throw std::invalid_argument("need at least one model");
  const int layers = models.front().config.num_layers;
  CurveSum masked(layers), unmasked(layers);
  ReproResult out;
  out.seeds = static_cast<int>(models.size());
  out.graphs = static_cast<int>(graphs.size());
  for (std::size_t s = 0; s < models.size(); ++s) {
    const ModelParams& p = models[s];
    if (p.config.num_layers != layers) throw std::invalid_argument("models differ in depth");
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const Graph& g = graphs[i];
      Rng rng = split_rng(seed, {s, i, 1});
      const auto chosen = sample_for(g, set_at(sets, i), thre, rng);
      if (chosen.empty()) continue;
      const Matrix e = basis_of(g.num_nodes, chosen);
      const DistanceTable dist = all_pairs_distances(g);
      TokenOptions opts;
      opts.s_max = p.config.s_max;

      ForwardTrace tm;
      model_forward(build_tokens(g, chosen, dist, rng, opts), p, &tm);
      masked.add(tm, e, p, g.num_nodes, chosen.size() >= 2);

      ForwardTrace tu;
      model_forward(build_tokens(g, {}, dist, rng, opts), p, &tu);
      unmasked.add(tu, e, p, g.num_nodes, false);
    }
  }
  out.masked = masked.finish(true);
  out.unmasked = unmasked.finish(false);
  return out;
}

CapacityCurve measure_capacity(const ModelParams& p, const std::vector<Graph>& graphs,
                               const std::vector<SubstructureSet>& sets, std::uint64_t seed, int thre) {
  CurveSum sum(p.config.num_layers);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = graphs[i];
    Rng rng = split_rng(seed, {i, 1});
    const auto chosen = sample_for(g, set_at(sets, i), thre, rng);
    if (chosen.empty()) continue;
    TokenOptions opts;
    opts.s_max = p.config.s_max;
    ForwardTrace tr;
    model_forward(build_tokens(g, chosen, all_pairs_distances(g), rng, opts), p, &tr);
    sum.add(tr, basis_of(g.num_nodes, chosen), p, g.num_nodes, chosen.size() >= 2);
  }
  return sum.finish(true);
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_local_attention: return "no_local_attention";
    case Variant::no_substructure_encoding: return "no_substructure_encoding";
    case Variant::no_deepnorm: return "no_deepnorm";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : {Variant::full, Variant::no_local_attention, Variant::no_substructure_encoding,
                    Variant::no_deepnorm}) {
    if (variant_name(v) == s) return v;
  }
  return std::nullopt;
}

void apply_variant(Variant v, ModelConfig& model, TrainConfig& train) {
  switch (v) {
    case Variant::full: break;
    case Variant::no_local_attention: train.substructure_tokens = false; break;
    case Variant::no_substructure_encoding: model.structural_encoding = false; break;
    case Variant::no_deepnorm: model.deepnorm = false; break;
  }
}

std::vector<AblationRow> run_ablation(const Dataset& train_set, const Dataset& eval_set, const ModelConfig& model,
                                      const TrainConfig& train_cfg, const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<AblationRow> rows;
  for (Variant v : variants) {
    for (std::uint64_t seed : seeds) {
      ModelConfig mc = model;
      TrainConfig tc = train_cfg;
      tc.seed = seed;
      apply_variant(v, mc, tc);
      Rng init_rng = split_rng(seed, {0x1417});
      ModelParams p = init_params(mc, init_rng);
      const auto log = train(p, train_set, &eval_set, tc);
      AblationRow row;
      row.variant = v;
      row.seed = seed;
      if (!log.empty()) {
        row.train_loss = log.back().train_loss;
        row.eval_metric = log.back().eval_metric;
      } else {
        row.eval_metric = evaluate(p, eval_set, tc, seed);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace deepgraph
