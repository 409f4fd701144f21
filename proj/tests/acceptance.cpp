// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "deepgraph/capacity.hpp"
#include "deepgraph/datasets.hpp"
#include "deepgraph/experiments.hpp"
#include "properties.hpp"

using namespace deepgraph;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

Result enumeration() {
  const auto r = props::enumeration_matches_oracle(200, 9, 2024);
  return {r.ok, r.ok ? std::to_string(r.checked) + " enumerations checked" : r.detail};
}

Result capacity_oracle() {
  double worst = 0.0;
  const auto r = props::capacity_matches_oracle(1000, 4, 3, 1e-9, 2024, &worst);
  std::ostringstream s;
  s << r.checked << " instances, max |diff| " << worst;
  if (!r.ok) s << "; " << r.detail;
  return {r.ok, s.str()};
}

Result theorem1() {
  StackSpec spec;
  spec.max_depth = 8;
  spec.max_n = 16;
  spec.max_m = 5;
  const auto r = verify_theorem1(spec, 1000, 2024);
  std::ostringstream s;
  s << r.trials << " trials, " << r.violations << " violations, " << r.alpha_not_below_one
    << " layers with alpha >= 1, max capacity/bound " << r.max_ratio;
  return {r.violations == 0 && r.alpha_not_below_one == 0, s.str()};
}

Result theorem3() {
  bool ok = true;
  std::ostringstream s;
  for (int n : {8, 16}) {
    const auto r = verify_theorem3(n, n, n / 2, n, 10000, 2024);
    ok = ok && r.ordering_holds;
    s << "n=" << n << ": adversarial global " << r.global_adversarial_alpha << " < local min " << r.local_min << "; ";
  }
  return {ok, s.str()};
}

Result gradients() {
  ModelConfig cfg;
  cfg.num_layers = 2;
  cfg.heads = 2;
  cfg.d_model = 8;
  cfg.d_head = 4;
  cfg.d_ffn = 16;
  cfg.node_vocab = 8;
  cfg.edge_vocab = 3;
  const auto r = props::gradient_check(cfg, 6, 2, 2024, 1e-4, 1e-4);
  std::ostringstream s;
  s << r.blocks << " blocks, worst relative error " << r.worst_rel << " (" << r.worst_block << "), "
    << r.skipped << " of " << r.entries << " entries crossed a ReLU kink";
  return {r.ok, s.str()};
}

Result capacity_decay() {
  Rng rng = split_rng(0, {0xDA7A});
  const auto graphs = gen_cycle_regression(10, 10, 16, 0.3, rng);
  std::vector<SubstructureSet> sets;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    Rng ex = split_rng(0, {i});
    sets.push_back(extract_all(graphs[i], VocabConfig::geometric(), ex, static_cast<int>(i)));
  }
  ModelConfig cfg;
  cfg.num_layers = 24;
  cfg.deepnorm = false;
  const auto r = repro_capacity(graphs, sets, cfg, 20, 0);
  const double u_first = r.unmasked.normalized.front();
  const double u_last = r.unmasked.normalized.back();
  const double m_last = r.masked.normalized.back();
  std::ostringstream s;
  s << "unmasked layer 1 " << u_first << " -> layer 24 " << u_last << "; masked layer 24 " << m_last;
  return {u_last < u_first && m_last > u_last, s.str()};
}

Result ablation() {
  Rng rng = split_rng(0, {0xDA7A});
  auto all = gen_cycle_regression(600, 10, 16, 0.3, rng);
  Dataset train_set, eval_set;
  train_set.graphs.assign(all.begin(), all.begin() + 500);
  eval_set.graphs.assign(all.begin() + 500, all.end());
  for (std::size_t i = 0; i < train_set.graphs.size(); ++i) {
    Rng ex = split_rng(0, {i});
    train_set.substructures.push_back(extract_all(train_set.graphs[i], VocabConfig::geometric(), ex, static_cast<int>(i)));
  }
  for (std::size_t i = 0; i < eval_set.graphs.size(); ++i) {
    Rng ex = split_rng(0xE7A1, {i});
    eval_set.substructures.push_back(extract_all(eval_set.graphs[i], VocabConfig::geometric(), ex, static_cast<int>(i)));
  }
  ModelConfig model;
  model.num_layers = 4;
  TrainConfig train;
  const auto rows =
      run_ablation(train_set, eval_set, model, train, {Variant::full, Variant::no_local_attention}, {0, 1, 2, 3});
  double full = 0.0, local = 0.0;
  for (const auto& r : rows) (r.variant == Variant::full ? full : local) += r.eval_metric / 4.0;
  std::ostringstream s;
  s << "mean eval MAE full " << full << ", no_local_attention " << local;
  return {full <= local, s.str()};
}

Result invariants() {
  const auto a = props::attention_invariants(200, 2024);
  const auto b = props::sampler_coverage(300, 2024);
  const auto c = props::dfs_permutation_invariance(5);
  std::ostringstream s;
  s << "attention " << (a.ok ? "ok" : a.detail) << " (" << a.checked << "), sampler " << (b.ok ? "ok" : b.detail)
    << " (" << b.checked << "), dfs " << (c.ok ? "ok" : c.detail) << " (" << c.checked << ")";
  return {a.ok && b.ok && c.ok, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"enumeration oracle", enumeration},   {"capacity oracle", capacity_oracle},
      {"stacked attention bound", theorem1}, {"local vs global contraction", theorem3},
      {"gradient check", gradients},         {"capacity decay with depth", capacity_decay},
      {"local attention ablation", ablation}, {"mask, sampler and DFS invariants", invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += r.pass ? 0 : 1;
    std::printf("%s %zu %s [%.1fs] %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs, r.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
