#include "deepgraph/checkpoint.hpp"

#include <fstream>

#include "deepgraph/errors.hpp"

namespace deepgraph {

namespace {

constexpr const char* kFormat = "deepgraph-checkpoint";

const char* task_name(Task t) { return t == Task::graph_regression ? "graph_regression" : "node_classification"; }

}  // namespace

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"num_layers", c.num_layers},
          {"heads", c.heads},
          {"d_model", c.d_model},
          {"d_head", c.d_head},
          {"d_ffn", c.d_ffn},
          {"node_vocab", c.node_vocab},
          {"edge_vocab", c.edge_vocab},
          {"s_max", c.s_max},
          {"task", task_name(c.task)},
          {"num_classes", c.num_classes},
          {"deepnorm", c.deepnorm},
          {"structural_encoding", c.structural_encoding},
          {"random_embed_rows", c.random_embed_rows},
          {"bias_init_std", c.bias_init_std}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.num_layers = j.at("num_layers").get<int>();
    c.heads = j.at("heads").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_head = j.at("d_head").get<int>();
    c.d_ffn = j.at("d_ffn").get<int>();
    c.node_vocab = j.at("node_vocab").get<int>();
    c.edge_vocab = j.at("edge_vocab").get<int>();
    c.s_max = j.at("s_max").get<int>();
    const auto task = j.at("task").get<std::string>();
    if (task == "graph_regression") {
      c.task = Task::graph_regression;
    } else if (task == "node_classification") {
      c.task = Task::node_classification;
    } else {
      throw DataError("unknown task " + task);
    }
    c.num_classes = j.at("num_classes").get<int>();
    c.deepnorm = j.at("deepnorm").get<bool>();
    c.structural_encoding = j.at("structural_encoding").get<bool>();
    c.random_embed_rows = j.value("random_embed_rows", c.random_embed_rows);
    c.bias_init_std = j.value("bias_init_std", c.bias_init_std);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  }
  return c;
}

nlohmann::json checkpoint_to_json(const ModelParams& p) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, m] : p.tensors()) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m->size()));
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) data.push_back((*m)(i, j));
    }
    tensors[name] = {{"shape", {m->rows(), m->cols()}}, {"data", std::move(data)}};
  }
  return {{"format", kFormat}, {"version", 1}, {"config", config_to_json(p.config)}, {"tensors", std::move(tensors)}};
}

ModelParams checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFormat) throw DataError("not a deepgraph checkpoint");
  const ModelConfig cfg = config_from_json(j.at("config"));
  Rng dummy(0);
  ModelParams p = init_params(cfg, dummy);
  const auto& tensors = j.at("tensors");
  for (auto& [name, m] : p.tensors()) {
    if (!tensors.contains(name)) throw DataError("checkpoint is missing tensor " + name);
    const auto& t = tensors.at(name);
    const auto shape = t.at("shape").get<std::vector<long>>();
    if (shape.size() != 2 || shape[0] != m->rows() || shape[1] != m->cols()) {
      throw DataError("tensor " + name + " has shape incompatible with the config");
    }
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<long>(data.size()) != shape[0] * shape[1]) throw DataError("tensor " + name + " data length");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = data[k++];
    }
  }
  return p;
}

void save_checkpoint(const std::string& path, const ModelParams& p) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << checkpoint_to_json(p).dump() << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace deepgraph
