#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "deepgraph/capacity.hpp"
#include "deepgraph/checkpoint.hpp"
#include "deepgraph/datasets.hpp"
#include "deepgraph/errors.hpp"
#include "deepgraph/linalg.hpp"
#include "deepgraph/sampler.hpp"
#include "deepgraph/training.hpp"

namespace py = pybind11;
using namespace deepgraph;

namespace {

// Graphs and reports cross the boundary as JSON text; the Python side decodes it.
Graph graph_from_text(const std::string& text) {
  std::istringstream in(text);
  auto graphs = parse_graphs_jsonl(in);
  if (graphs.size() != 1) throw DataError("expected exactly one graph record");
  return graphs.front();
}

std::vector<Graph> graphs_from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_graphs_jsonl(in);
}

std::string graphs_to_text(const std::vector<Graph>& graphs) {
  std::string out;
  for (const auto& g : graphs) out += graph_to_json(g).dump() + "\n";
  return out;
}

VocabConfig vocab_of(const std::vector<std::string>& kinds) {
  if (kinds.empty()) return VocabConfig::geometric();
  std::vector<SubKind> ks;
  for (const auto& k : kinds) {
    auto parsed = parse_kind(k);
    if (!parsed) throw std::invalid_argument("unknown substructure kind " + k);
    ks.push_back(*parsed);
  }
  return VocabConfig::from_kinds(ks);
}

ModelConfig model_config(int layers, int heads, int d_model, int d_head, int d_ffn, int node_vocab, int edge_vocab,
                         bool deepnorm) {
  ModelConfig c;
  c.num_layers = layers;
  c.heads = heads;
  c.d_model = d_model;
  c.d_head = d_head;
  c.d_ffn = d_ffn;
  c.node_vocab = node_vocab;
  c.edge_vocab = edge_vocab;
  c.deepnorm = deepnorm;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Substructure-aware graph transformer core";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "distances",
      [](const std::string& graph) {
        const Graph g = graph_from_text(graph);
        const auto d = all_pairs_distances(g);
        Eigen::MatrixXi out(g.num_nodes, g.num_nodes);
        for (int i = 0; i < g.num_nodes; ++i)
          for (int j = 0; j < g.num_nodes; ++j) out(i, j) = d.distance(i, j);
        return out;
      },
      py::arg("graph"), "Hop distances; unreachable pairs get the overflow bucket.");

  m.def(
      "extract",
      [](const std::string& graph, const std::vector<std::string>& kinds, std::uint64_t seed) {
        const Graph g = graph_from_text(graph);
        Rng rng(seed);
        return set_to_json(extract_all(g, vocab_of(kinds), rng)).dump();
      },
      py::arg("graph"), py::arg("kinds") = std::vector<std::string>{}, py::arg("seed") = 0);

  m.def(
      "sample",
      [](const std::string& graph, const std::vector<std::string>& kinds, int thre, std::uint64_t seed) {
        const Graph g = graph_from_text(graph);
        Rng rng(seed);
        const auto set = extract_all(g, vocab_of(kinds), rng);
        const auto chosen = sample_substructures(set, g.num_nodes, SamplerParams::defaults_for(g.num_nodes, thre), rng);
        std::vector<std::vector<int>> nodes;
        for (int i : chosen) nodes.push_back(set.items[i].nodes);
        return nodes;
      },
      py::arg("graph"), py::arg("kinds") = std::vector<std::string>{}, py::arg("thre") = 1, py::arg("seed") = 0);

  m.def(
      "canonical_form",
      [](const std::vector<std::vector<int>>& adjacency, int s_max, std::uint64_t seed) {
        const int n = static_cast<int>(adjacency.size());
        Graph g;
        g.num_nodes = n;
        for (int a = 0; a < n; ++a) {
          if (static_cast<int>(adjacency[a].size()) != n) throw std::invalid_argument("adjacency must be square");
          for (int b = a + 1; b < n; ++b)
            if (adjacency[a][b]) g.edges.push_back({a, b});
        }
        g.node_feat.assign(n, 0);
        g.edge_feat.assign(g.edges.size(), 0);
        std::vector<int> nodes(n);
        for (int i = 0; i < n; ++i) nodes[i] = i;
        Rng rng(seed);
        const auto form = canonicalize(make_induced(Adjacency(g), nodes, SubKind::khop), rng, s_max);
        return py::make_tuple(form.perm, std::vector<int>(form.flat_adj.begin(), form.flat_adj.end()));
      },
      py::arg("adjacency"), py::arg("s_max") = kDefaultSMax, py::arg("seed") = 0);

  m.def(
      "gen_cycles",
      [](int n, int nodes_min, int nodes_max, double edge_prob, std::uint64_t seed) {
        Rng rng(seed);
        return graphs_to_text(gen_cycle_regression(n, nodes_min, nodes_max, edge_prob, rng));
      },
      py::arg("n"), py::arg("nodes_min") = 10, py::arg("nodes_max") = 16, py::arg("edge_prob") = 0.3,
      py::arg("seed") = 0);

  m.def(
      "gen_communities",
      [](int n, int nodes_per_block, double p_in, double p_out, double reveal, std::uint64_t seed) {
        Rng rng(seed);
        return graphs_to_text(gen_community_nodes(n, nodes_per_block, p_in, p_out, rng, reveal));
      },
      py::arg("n"), py::arg("nodes_per_block") = 10, py::arg("p_in") = 0.3, py::arg("p_out") = 0.05,
      py::arg("reveal") = 0.1, py::arg("seed") = 0);

  m.def("count_induced_cycles", [](const std::string& graph) { return count_induced_cycles(graph_from_text(graph)); });

  m.def("attention_capacity", &attention_capacity, py::arg("h"), py::arg("e"), py::arg("wvo"));
  m.def("pattern_basis", &pattern_basis, py::arg("n"), py::arg("memberships"));
  m.def("token_capacity", &token_capacity_of, py::arg("states"), py::arg("wvo"));
  m.def(
      "spectral_norm", [](const Eigen::MatrixXd& a) { return spectral_norm(a); }, py::arg("m"));

  m.def(
      "verify_bounds",
      [](int theorem, int trials, std::uint64_t seed, int n) {
        if (theorem == 3) return verify_theorem3(n, n, std::max(1, n / 2), n, trials, seed).to_json().dump();
        if (theorem != 1 && theorem != 2) throw std::invalid_argument("theorem must be 1, 2 or 3");
        StackSpec spec;
        spec.with_ffn = theorem == 2;
        return verify_stack_bound(spec, trials, seed).to_json(false).dump();
      },
      py::arg("theorem"), py::arg("trials") = 100, py::arg("seed") = 0, py::arg("n") = 8);

  m.def(
      "forward",
      [](const std::string& graph, const std::vector<std::vector<int>>& substructures, int layers, int heads,
         int d_model, int d_head, int d_ffn, bool deepnorm, std::uint64_t seed) {
        const Graph g = graph_from_text(graph);
        int node_vocab = 1, edge_vocab = 1;
        for (int f : g.node_feat) node_vocab = std::max(node_vocab, f + 1);
        for (int f : g.edge_feat) edge_vocab = std::max(edge_vocab, f + 1);
        Rng rng(seed);
        const auto p = init_params(model_config(layers, heads, d_model, d_head, d_ffn, node_vocab, edge_vocab, deepnorm), rng);
        Adjacency adj(g);
        std::vector<Substructure> chosen;
        for (const auto& nodes : substructures) chosen.push_back(make_induced(adj, nodes, SubKind::khop));
        ForwardTrace tr;
        const auto pred = model_forward(g, chosen, p, rng, &tr);
        py::list attn;
        for (const auto& lt : tr.layers) attn.append(lt.attn);
        return py::make_tuple(pred.value, tr.final_hidden, attn);
      },
      py::arg("graph"), py::arg("substructures") = std::vector<std::vector<int>>{}, py::arg("layers") = 2,
      py::arg("heads") = 2, py::arg("d_model") = 16, py::arg("d_head") = 8, py::arg("d_ffn") = 32,
      py::arg("deepnorm") = true, py::arg("seed") = 0,
      "Random-weight forward pass; returns (prediction, final hidden states, per-layer attention).");

  m.def(
      "train_cycles",
      [](const std::string& graphs, int layers, int epochs, double lr, std::uint64_t seed) {
        Dataset data;
        data.graphs = graphs_from_text(graphs);
        int node_vocab = 1;
        for (std::size_t i = 0; i < data.graphs.size(); ++i) {
          for (int f : data.graphs[i].node_feat) node_vocab = std::max(node_vocab, f + 1);
          Rng rng = split_rng(seed, {i});
          data.substructures.push_back(extract_all(data.graphs[i], VocabConfig::geometric(), rng, static_cast<int>(i)));
        }
        ModelConfig mc;
        mc.num_layers = layers;
        mc.node_vocab = std::max(mc.node_vocab, node_vocab);
        TrainConfig tc;
        tc.epochs = epochs;
        tc.lr_peak = lr;
        tc.seed = seed;
        Rng rng = split_rng(seed, {0x1417});
        auto p = init_params(mc, rng);
        std::vector<std::pair<double, double>> log;
        for (const auto& r : train(p, data, nullptr, tc)) log.emplace_back(r.train_loss, r.eval_metric);
        return log;
      },
      py::arg("graphs"), py::arg("layers") = 2, py::arg("epochs") = 5, py::arg("lr") = 1e-3, py::arg("seed") = 0,
      "Trains a regression model on JSON-lines graphs; returns (train_loss, eval_metric) per epoch.");
}
