#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "deepgraph/capacity.hpp"
#include "deepgraph/checkpoint.hpp"
#include "deepgraph/datasets.hpp"
#include "deepgraph/errors.hpp"
#include "deepgraph/experiments.hpp"
#include "deepgraph/sampler.hpp"
#include "deepgraph/training.hpp"

namespace deepgraph::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
};

// ---------------------------------------------------------------------------
// shared helpers

fs::path out_path(const Globals& g, const std::string& fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

// Resolved settings of one run, loadable again through --config.
void write_snapshot(const fs::path& path, const CLI::App& sub, const Globals& g, const fs::path& out) {
  std::ofstream f = open_out(path);
  f << "seed = " << g.seed << "\n";
  f << "out = \"" << out.generic_string() << "\"\n";
  f << "[" << sub.get_name() << "]\n";
  f << sub.config_to_str(true, false);
}

fs::path snapshot_beside_file(const fs::path& file) {
  return file.parent_path() / (file.stem().string() + ".config.toml");
}

void csv_preamble(std::ostream& out, std::uint64_t seed, const std::string& header) {
  out << "# seed=" << seed << "\n" << header << "\n";
}

struct ModelOpts {
  int layers = 4;
  int heads = 4;
  int d_model = 32;
  int d_head = 8;
  int d_ffn = 64;
  int s_max = kDefaultSMax;
  bool no_deepnorm = false;
  bool no_substructure_encoding = false;

  void add(CLI::App* app) {
    app->add_option("--layers", layers, "transformer layers")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--heads", heads, "attention heads")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--d-model", d_model, "hidden width")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--d-head", d_head, "per-head key/value width")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--d-ffn", d_ffn, "feed-forward width")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--s-max", s_max, "largest substructure encoded")->check(CLI::Range(2, 64))->capture_default_str();
    app->add_flag("--no-deepnorm", no_deepnorm, "plain post-LN residuals");
    app->add_flag("--no-substructure-encoding", no_substructure_encoding,
                  "fixed random embeddings for substructure tokens");
  }

  ModelConfig config(const std::vector<Graph>& graphs) const {
    ModelConfig c;
    c.num_layers = layers;
    c.heads = heads;
    c.d_model = d_model;
    c.d_head = d_head;
    c.d_ffn = d_ffn;
    c.s_max = s_max;
    c.deepnorm = !no_deepnorm;
    c.structural_encoding = !no_substructure_encoding;
    for (const auto& g : graphs) {
      for (int f : g.node_feat) c.node_vocab = std::max(c.node_vocab, f + 1);
      for (int f : g.edge_feat) c.edge_vocab = std::max(c.edge_vocab, f + 1);
    }
    return c;
  }
};

struct TrainOpts {
  int epochs = 30;
  int batch_size = 16;
  double lr = 1e-3;
  int warmup = 100;
  int total_steps = 0;
  int thre = 1;
  bool no_local_attention = false;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs)->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--lr", lr, "peak learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--warmup", warmup, "warm-up steps")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--total-steps", total_steps, "0 = epochs x batches")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--thre", thre, "sampler coverage threshold")->check(CLI::PositiveNumber)->capture_default_str();
  }

  TrainConfig config(std::uint64_t seed, Task task) const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.lr_peak = lr;
    c.warmup_steps = warmup;
    c.total_steps = total_steps;
    c.seed = seed;
    c.task = task;
    c.sampler_thre = thre;
    c.substructure_tokens = !no_local_attention;
    return c;
  }
};

std::vector<SubstructureSet> load_or_extract(const std::vector<Graph>& graphs, const std::string& cache, int s_max,
                                             std::uint64_t seed) {
  if (!cache.empty()) return read_cache(cache, graphs);
  VocabConfig vocab = VocabConfig::geometric();
  vocab.s_max = s_max;
  std::vector<SubstructureSet> sets;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    Rng rng = split_rng(seed, {i});
    sets.push_back(extract_all(graphs[i], vocab, rng, static_cast<int>(i)));
  }
  return sets;
}

Task infer_task(const std::vector<Graph>& graphs, const std::string& flag) {
  if (flag == "graph_regression") return Task::graph_regression;
  if (flag == "node_classification") return Task::node_classification;
  if (graphs.empty()) throw DataError("dataset is empty");
  return graphs.front().node_labels.empty() ? Task::graph_regression : Task::node_classification;
}

int class_count(const std::vector<Graph>& graphs) {
  int c = 2;
  for (const auto& g : graphs)
    for (int y : g.node_labels) c = std::max(c, y + 1);
  return c;
}

std::vector<Graph> default_cycle_graphs(int count, std::uint64_t seed) {
  Rng rng = split_rng(seed, {0xDA7A});
  return gen_cycle_regression(count, 10, 16, 0.3, rng);
}

void write_curve(const fs::path& path, std::uint64_t seed, const CapacityCurve& c, bool tokens) {
  auto out = open_out(path);
  csv_preamble(out, seed, tokens ? "layer,capacity,normalized,token_capacity" : "layer,capacity,normalized");
  for (std::size_t l = 0; l < c.normalized.size(); ++l) {
    out << l + 1 << "," << c.capacity[l] << "," << c.normalized[l];
    if (tokens) out << "," << c.token_capacity[l];
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// gen

struct GenCmd {
  std::string task;
  int n = 100;
  int nodes_min = 6;
  int nodes_max = 16;
  double edge_prob = 0.3;
  int nodes_per_block = 10;
  double p_in = 0.3;
  double p_out = 0.05;
  double reveal = 0.1;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("gen", "generate a synthetic dataset as JSON lines");
    app->add_option("--task", task, "cycles | communities")
        ->required()
        ->check(CLI::IsMember({"cycles", "communities"}));
    app->add_option("--n", n, "number of graphs")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--nodes-min", nodes_min)->capture_default_str();
    app->add_option("--nodes-max", nodes_max)->capture_default_str();
    app->add_option("--edge-prob", edge_prob)->capture_default_str();
    app->add_option("--nodes-per-block", nodes_per_block)->capture_default_str();
    app->add_option("--p-in", p_in)->capture_default_str();
    app->add_option("--p-out", p_out)->capture_default_str();
    app->add_option("--reveal", reveal, "share of nodes that carry their label")->capture_default_str();
  }

  void run(const Globals& g) const {
    const fs::path out = out_path(g, "graphs.jsonl");
    Rng rng = split_rng(g.seed, {0x6E});
    std::vector<Graph> graphs = task == "cycles"
                                    ? gen_cycle_regression(n, nodes_min, nodes_max, edge_prob, rng)
                                    : gen_community_nodes(n, nodes_per_block, p_in, p_out, rng, reveal);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_graphs_jsonl(out.string(), graphs);
    write_snapshot(snapshot_beside_file(out), *app, g, out);
    std::cout << "wrote " << graphs.size() << " graphs to " << out.string() << "\n";
  }
};

// ---------------------------------------------------------------------------
// extract

struct ExtractCmd {
  std::string input;
  std::vector<std::string> kinds{"cycle", "star", "path"};
  int s_max = kDefaultSMax;
  int khop_k = 2;
  int rwalk_steps = 10;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("extract", "enumerate substructures into a cache file");
    app->add_option("--input", input, "graphs (JSON lines)")->required();
    app->add_option("--kinds", kinds, "comma separated kinds")
        ->delimiter(',')
        ->check(CLI::IsMember({"cycle", "star", "path", "khop", "rwalk"}))
        ->capture_default_str();
    app->add_option("--s-max", s_max, "neighbourhood size cap")->check(CLI::Range(2, 64))->capture_default_str();
    app->add_option("--khop-k", khop_k)->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--rwalk-steps", rwalk_steps)->check(CLI::NonNegativeNumber)->capture_default_str();
  }

  void run(const Globals& g) const {
    const fs::path out = out_path(g, "cache.json");
    const auto graphs = read_graphs_jsonl(input);
    std::vector<SubKind> ks;
    for (const auto& k : kinds) ks.push_back(*parse_kind(k));
    VocabConfig vocab = VocabConfig::from_kinds(ks);
    vocab.s_max = s_max;
    vocab.khop_k = khop_k;
    vocab.rwalk_steps = rwalk_steps;
    std::vector<SubstructureSet> sets;
    std::size_t total = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      Rng rng = split_rng(g.seed, {i});
      sets.push_back(extract_all(graphs[i], vocab, rng, static_cast<int>(i)));
      total += sets.back().items.size();
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_cache(out.string(), sets);
    write_snapshot(snapshot_beside_file(out), *app, g, out);
    std::cout << "wrote " << total << " substructures for " << graphs.size() << " graphs to " << out.string()
              << "\n";
  }
};

// ---------------------------------------------------------------------------
// sample

struct SampleCmd {
  std::string input;
  std::string cache;
  int thre = 1;
  int n_init = 0;
  int top_k = 0;
  int n_sample = 0;
  int m_max = 0;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("sample", "draw a coverage-balanced substructure sample per graph");
    app->add_option("--input", input, "graphs (JSON lines)")->required();
    app->add_option("--cache", cache, "substructure cache; extracted on the fly when absent");
    app->add_option("--thre", thre)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--n-init", n_init, "0 = size-based default")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--top-k", top_k, "0 = size-based default")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--n-sample", n_sample, "0 = size-based default")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--m-max", m_max, "0 = size-based default")->check(CLI::NonNegativeNumber)->capture_default_str();
  }

  SamplerParams params(int num_nodes) const {
    SamplerParams p = SamplerParams::defaults_for(num_nodes, thre);
    if (n_init > 0) p.n_init = n_init;
    if (n_sample > 0) p.n_sample = n_sample;
    if (top_k > 0) p.top_k = top_k;
    else if (n_sample > 0) p.top_k = 2 * p.n_sample;
    if (m_max > 0) p.m_max = m_max;
    if (auto bad = p.check()) throw std::invalid_argument("sampler: " + *bad);
    return p;
  }

  void run(const Globals& g) const {
    const fs::path out = out_path(g, "samples.json");
    const auto graphs = read_graphs_jsonl(input);
    const auto sets = load_or_extract(graphs, cache, kDefaultSMax, g.seed);
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      Rng rng = split_rng(g.seed, {i, 1});
      const auto idx = sample_substructures(sets[i], graphs[i].num_nodes, params(graphs[i].num_nodes), rng);
      auto nodes = nlohmann::json::array();
      for (int k : idx) nodes.push_back(sets[i].items[k].nodes);
      arr.push_back({{"graph_id", i}, {"items", idx}, {"nodes", std::move(nodes)}});
    }
    auto f = open_out(out);
    f << arr.dump() << "\n";
    write_snapshot(snapshot_beside_file(out), *app, g, out);
    std::cout << "wrote samples for " << graphs.size() << " graphs to " << out.string() << "\n";
  }
};

// ---------------------------------------------------------------------------
// train

struct TrainCmd {
  std::string data, cache, eval_data, eval_cache;
  std::string task = "auto";
  ModelOpts model;
  TrainOpts train;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("train", "train a model; writes model.json and train_log.csv");
    app->add_option("--data", data, "training graphs (JSON lines)")->required();
    app->add_option("--cache", cache, "substructure cache for --data");
    app->add_option("--eval-data", eval_data, "evaluation graphs; the training set is scored when absent");
    app->add_option("--eval-cache", eval_cache);
    app->add_option("--task", task)
        ->check(CLI::IsMember({"auto", "graph_regression", "node_classification"}))
        ->capture_default_str();
    model.add(app);
    train.add(app);
    app->add_flag("--no-local-attention", train.no_local_attention, "train without substructure tokens");
  }

  void run(const Globals& g) const {
    const fs::path dir = out_path(g, "ckpt");
    Dataset tr;
    tr.graphs = read_graphs_jsonl(data);
    tr.substructures = load_or_extract(tr.graphs, cache, model.s_max, g.seed);
    Dataset ev;
    const bool has_eval = !eval_data.empty();
    if (has_eval) {
      ev.graphs = read_graphs_jsonl(eval_data);
      ev.substructures = load_or_extract(ev.graphs, eval_cache, model.s_max, g.seed ^ 0xE7A1ULL);
    }
    std::vector<Graph> all = tr.graphs;
    all.insert(all.end(), ev.graphs.begin(), ev.graphs.end());
    const Task t = infer_task(tr.graphs, task);
    ModelConfig mc = model.config(all);
    mc.task = t;
    if (t == Task::node_classification) mc.num_classes = class_count(all);
    const TrainConfig tc = train.config(g.seed, t);

    Rng init_rng = split_rng(g.seed, {0x1417});
    ModelParams p = init_params(mc, init_rng);
    fs::create_directories(dir);
    auto log = open_out(dir / "train_log.csv");
    csv_preamble(log, g.seed, "epoch,train_loss,eval_metric,lr");
    deepgraph::train(p, tr, has_eval ? &ev : nullptr, tc, [&](const EpochRecord& r) {
      log << r.epoch << "," << r.train_loss << "," << r.eval_metric << "," << r.lr << "\n";
      log.flush();
    });
    save_checkpoint((dir / "model.json").string(), p);
    write_snapshot(dir / "config.toml", *app, g, dir);
    std::cout << "wrote " << (dir / "model.json").string() << "\n";
  }
};

// ---------------------------------------------------------------------------
// capacity

ModelParams load_model(const std::string& where) {
  fs::path p(where);
  if (fs::is_directory(p)) p /= "model.json";
  return load_checkpoint(p.string());
}

struct CapacityCmd {
  std::string ckpt, data, cache;
  int thre = 1;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("capacity", "per-layer attention capacity of a checkpoint");
    app->add_option("--ckpt", ckpt, "checkpoint directory or model.json")->required();
    app->add_option("--data", data, "graphs (JSON lines)")->required();
    app->add_option("--cache", cache, "substructure cache for --data");
    app->add_option("--thre", thre)->check(CLI::PositiveNumber)->capture_default_str();
  }

  void run(const Globals& g) const {
    const fs::path out = out_path(g, "capacity.csv");
    const ModelParams p = load_model(ckpt);
    const auto graphs = read_graphs_jsonl(data);
    const auto sets = load_or_extract(graphs, cache, p.config.s_max, g.seed);
    write_curve(out, g.seed, measure_capacity(p, graphs, sets, g.seed, thre), true);
    write_snapshot(snapshot_beside_file(out), *app, g, out);
    std::cout << "wrote " << out.string() << "\n";
  }
};

// ---------------------------------------------------------------------------
// verify-bounds

struct VerifyCmd {
  int theorem = 1;
  int trials = 1000;
  int max_depth = 8;
  int max_n = 16;
  int max_m = 5;
  int d = 16;
  int n = 16;
  int m = 0;
  int r_max = 0;
  bool details = false;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("verify-bounds", "check the capacity bounds on random instances");
    app->add_option("--theorem", theorem, "1: attention stack, 2: with FFN, 3: local vs global")
        ->required()
        ->check(CLI::IsMember({1, 2, 3}));
    app->add_option("--trials", trials)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-depth", max_depth)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-n", max_n)->check(CLI::Range(2, 64))->capture_default_str();
    app->add_option("--max-m", max_m)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--d", d, "feature width")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--n", n, "nodes (theorem 3)")->check(CLI::Range(2, 4096))->capture_default_str();
    app->add_option("--m", m, "substructures (theorem 3), 0 = n")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--r-max", r_max, "co-membership bound (theorem 3), 0 = n/2")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_flag("--details", details, "include per-trial records (theorems 1 and 2)");
  }

  void run(const Globals& g) const {
    const fs::path out = out_path(g, "report.json");
    nlohmann::json rep;
    bool ok = true;
    if (theorem == 3) {
      const int r = r_max > 0 ? r_max : n / 2;
      const auto res = verify_theorem3(n, m > 0 ? m : n, r, d, trials, g.seed);
      rep = res.to_json();
      ok = res.ordering_holds;
    } else {
      StackSpec spec;
      spec.max_depth = max_depth;
      spec.max_n = max_n;
      spec.max_m = max_m;
      spec.d = d;
      const auto res = theorem == 1 ? verify_theorem1(spec, trials, g.seed) : verify_theorem2(spec, trials, g.seed);
      rep = res.to_json(details);
      ok = res.violations == 0 && res.alpha_not_below_one == 0;
    }
    auto f = open_out(out);
    f << rep.dump(2) << "\n";
    write_snapshot(snapshot_beside_file(out), *app, g, out);
    std::cout << "theorem " << theorem << ": " << (ok ? "holds" : "violated") << " on " << trials
              << " trials; report in " << out.string() << "\n";
  }
};

// ---------------------------------------------------------------------------
// repro-capacity

struct ReproCmd {
  std::string data, cache, ckpt;
  int graphs = 10;
  int seeds = 20;
  int thre = 1;
  ModelOpts model;
  CLI::Option* layers_opt = nullptr;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("repro-capacity", "capacity by depth for masked and unmasked attention");
    app->add_option("--data", data, "graphs; random cycle graphs when absent");
    app->add_option("--cache", cache);
    app->add_option("--ckpt", ckpt, "trained weights; random weights per seed when absent");
    app->add_option("--graphs", graphs, "generated graphs when --data is absent")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--seeds", seeds, "random-weight draws")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--thre", thre)->check(CLI::PositiveNumber)->capture_default_str();
    model.layers = 24;
    model.add(app);
    layers_opt = app->get_option("--layers");
  }

  void run(const Globals& g) const {
    const fs::path dir = out_path(g, "repro");
    const auto gs = data.empty() ? default_cycle_graphs(graphs, g.seed) : read_graphs_jsonl(data);
    ReproResult res;
    if (!ckpt.empty()) {
      ModelParams p = load_model(ckpt);
      if (layers_opt->count() > 0 && p.config.num_layers != model.layers) {
        throw DataError("checkpoint has " + std::to_string(p.config.num_layers) + " layers, --layers asks for " +
                        std::to_string(model.layers));
      }
      const auto sets = load_or_extract(gs, cache, p.config.s_max, g.seed);
      res = repro_capacity(gs, sets, std::vector<ModelParams>{std::move(p)}, g.seed, thre);
    } else {
      const auto sets = load_or_extract(gs, cache, model.s_max, g.seed);
      res = repro_capacity(gs, sets, model.config(gs), seeds, g.seed, thre);
    }
    fs::create_directories(dir);
    write_curve(dir / "masked.csv", g.seed, res.masked, true);
    write_curve(dir / "unmasked.csv", g.seed, res.unmasked, false);
    write_snapshot(dir / "config.toml", *app, g, dir);
    std::cout << "wrote masked.csv and unmasked.csv to " << dir.string() << "\n";
  }
};

// ---------------------------------------------------------------------------
// ablate

struct AblateCmd {
  std::string data, eval_data;
  int n_train = 500;
  int n_eval = 100;
  std::vector<std::string> variants{"full", "no_local_attention", "no_substructure_encoding", "no_deepnorm"};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
  ModelOpts model;
  TrainOpts train;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("ablate", "train model variants on one split and compare");
    app->add_option("--data", data, "training graphs; generated cycle-count data when absent");
    app->add_option("--eval-data", eval_data, "evaluation graphs (required with --data)");
    app->add_option("--n-train", n_train)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--n-eval", n_eval)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--variants", variants, "comma separated variants")
        ->delimiter(',')
        ->check(CLI::IsMember({"full", "no_local_attention", "no_substructure_encoding", "no_deepnorm"}))
        ->capture_default_str();
    app->add_option("--seeds", seeds, "comma separated model seeds")->delimiter(',')->capture_default_str();
    model.add(app);
    train.add(app);
  }

  void run(const Globals& g) const {
    const fs::path out = out_path(g, "ablation.csv");
    Dataset tr, ev;
    if (data.empty()) {
      auto all = default_cycle_graphs(n_train + n_eval, g.seed);
      tr.graphs.assign(all.begin(), all.begin() + n_train);
      ev.graphs.assign(all.begin() + n_train, all.end());
    } else {
      if (eval_data.empty()) throw std::invalid_argument("--eval-data is required with --data");
      tr.graphs = read_graphs_jsonl(data);
      ev.graphs = read_graphs_jsonl(eval_data);
    }
    tr.substructures = load_or_extract(tr.graphs, "", model.s_max, g.seed);
    ev.substructures = load_or_extract(ev.graphs, "", model.s_max, g.seed ^ 0xE7A1ULL);
    std::vector<Graph> all = tr.graphs;
    all.insert(all.end(), ev.graphs.begin(), ev.graphs.end());
    const Task t = infer_task(tr.graphs, "auto");
    ModelConfig mc = model.config(all);
    mc.task = t;
    if (t == Task::node_classification) mc.num_classes = class_count(all);

    std::vector<Variant> vs;
    for (const auto& v : variants) vs.push_back(*parse_variant(v));
    const auto rows = run_ablation(tr, ev, mc, train.config(g.seed, t), vs, seeds);

    auto f = open_out(out);
    csv_preamble(f, g.seed, "variant,seed,train_loss,eval_metric");
    for (const auto& r : rows) {
      f << variant_name(r.variant) << "," << r.seed << "," << r.train_loss << "," << r.eval_metric << "\n";
    }
    for (Variant v : vs) {
      double loss = 0.0, metric = 0.0;
      int k = 0;
      for (const auto& r : rows) {
        if (r.variant != v) continue;
        loss += r.train_loss;
        metric += r.eval_metric;
        ++k;
      }
      if (k > 0) f << variant_name(v) << ",mean," << loss / k << "," << metric / k << "\n";
    }
    write_snapshot(snapshot_beside_file(out), *app, g, out);
    std::cout << "wrote " << out.string() << "\n";
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"deepgraph: substructure-token graph transformer toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "random seed")->capture_default_str();
  app.add_option("--out", globals.out, "output file or directory");
  app.set_config("--config", "", "TOML or INI file with option values; [command] sections apply to one command");

  GenCmd gen;
  ExtractCmd extract;
  SampleCmd sample;
  TrainCmd train;
  CapacityCmd capacity;
  VerifyCmd verify;
  ReproCmd repro;
  AblateCmd ablate;
  gen.add(app);
  extract.add(app);
  sample.add(app);
  train.add(app);
  capacity.add(app);
  verify.add(app);
  repro.add(app);
  ablate.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen.app->parsed()) gen.run(globals);
    else if (extract.app->parsed()) extract.run(globals);
    else if (sample.app->parsed()) sample.run(globals);
    else if (train.app->parsed()) train.run(globals);
    else if (capacity.app->parsed()) capacity.run(globals);
    else if (verify.app->parsed()) verify.run(globals);
    else if (repro.app->parsed()) repro.run(globals);
    else if (ablate.app->parsed()) ablate.run(globals);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace deepgraph::cli
