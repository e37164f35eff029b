#include <fstream>

#include "hitforge/models.hpp"
#include "json.hpp"

namespace hitforge::models {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  doc["threshold"] = c.threshold;
  doc["lr"] = {{"epochs", c.lr.epochs},
               {"learning_rate", c.lr.learning_rate},
               {"rho", c.lr.rho},
               {"epsilon", c.lr.epsilon}};
  doc["mlp"] = {{"hidden_units", c.mlp.hidden_units},
                {"batch_size", c.mlp.batch_size},
                {"epochs", c.mlp.epochs},
                {"learning_rate", c.mlp.learning_rate},
                {"rho", c.mlp.rho},
                {"epsilon", c.mlp.epsilon}};
  doc["forest"] = {{"n_estimators", c.forest.n_estimators},
                   {"max_features", c.forest.max_features},
                   {"min_samples_split", c.forest.min_samples_split},
                   {"bootstrap", c.forest.bootstrap}};
  doc["svm"] = {{"gamma", c.svm.gamma},
                {"c", c.svm.c},
                {"tolerance", c.svm.tolerance},
                {"max_passes", c.svm.max_passes}};
  return doc;
}

ModelConfig config_from_json(const json& doc) {
  ModelConfig c;
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.threshold = doc.at("threshold").get<double>();
  const auto& lr = doc.at("lr");
  c.lr = {lr.at("epochs").get<int>(), lr.at("learning_rate").get<double>(),
          lr.at("rho").get<double>(), lr.at("epsilon").get<double>()};
  const auto& mlp = doc.at("mlp");
  c.mlp = {mlp.at("hidden_units").get<int>(), mlp.at("batch_size").get<int>(),
           mlp.at("epochs").get<int>(),       mlp.at("learning_rate").get<double>(),
           mlp.at("rho").get<double>(),       mlp.at("epsilon").get<double>()};
  const auto& rf = doc.at("forest");
  c.forest = {rf.at("n_estimators").get<int>(), rf.at("max_features").get<int>(),
              rf.at("min_samples_split").get<int>(),
              rf.at("bootstrap").get<bool>()};
  const auto& svm = doc.at("svm");
  c.svm = {svm.at("gamma").get<double>(), svm.at("c").get<double>(),
           svm.at("tolerance").get<double>(), svm.at("max_passes").get<int>()};
  return c;
}

json params_to_json(const TrainedModel& model) {
  json doc;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogRegModel>) {
          doc["beta"] = m.beta;
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          doc["input_dim"] = m.input_dim;
          doc["hidden_units"] = m.hidden_units;
          doc["values"] = m.params;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          doc["input_dim"] = m.input_dim;
          json trees = json::array();
          for (const auto& tree : m.trees) {
            json nodes = json::array();
            for (const auto& nd : tree.nodes) {
              nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right,
                               nd.count0, nd.count1});
            }
            trees.push_back({{"seed", tree.seed}, {"nodes", std::move(nodes)}});
          }
          doc["trees"] = std::move(trees);
        } else {
          doc["gamma"] = m.gamma;
          doc["bias"] = m.bias;
          doc["alphas"] = m.alphas;
          doc["labels"] = m.labels;
          doc["support_vectors"] = m.support_vectors;
        }
      },
      model);
  return doc;
}

TrainedModel params_from_json(ModelKind kind, const json& doc) {
  switch (kind) {
    case ModelKind::lr: {
      LogRegModel m;
      m.beta = doc.at("beta").get<std::vector<double>>();
      return m;
    }
    case ModelKind::nn: {
      MlpModel m;
      m.input_dim = doc.at("input_dim").get<std::size_t>();
      m.hidden_units = doc.at("hidden_units").get<std::size_t>();
      m.params = doc.at("values").get<std::vector<double>>();
      if (m.params.size() != mlp_param_count(m.input_dim, m.hidden_units)) {
        throw DomainError("mlp parameter count mismatch in model file");
      }
      return m;
    }
    case ModelKind::rf: {
      ForestModel m;
      m.input_dim = doc.at("input_dim").get<std::size_t>();
      for (const auto& tdoc : doc.at("trees")) {
        Tree tree;
        tree.seed = tdoc.at("seed").get<std::uint64_t>();
        for (const auto& nd : tdoc.at("nodes")) {
          tree.nodes.push_back(TreeNode{nd.at(0).get<int>(),
                                        nd.at(1).get<double>(),
                                        nd.at(2).get<int>(),
                                        nd.at(3).get<int>(),
                                        nd.at(4).get<long long>(),
                                        nd.at(5).get<long long>()});
        }
        m.trees.push_back(std::move(tree));
      }
      return m;
    }
    case ModelKind::svm: {
      SvmModel m;
      m.gamma = doc.at("gamma").get<double>();
      m.bias = doc.at("bias").get<double>();
      m.alphas = doc.at("alphas").get<std::vector<double>>();
      m.labels = doc.at("labels").get<std::vector<int>>();
      m.support_vectors =
          doc.at("support_vectors").get<std::vector<std::vector<double>>>();
      return m;
    }
  }
  throw DomainError("bad model kind value");
}

}  // namespace

void save_model(const std::filesystem::path& path, const TrainedModel& model,
                const feat::FeatureSchema& schema,
                const feat::ScalerStats& scaler, const ModelConfig& config) {
  json doc;
  doc["format"] = "hitforge-model";
  doc["version"] = 1;
  doc["kind"] = to_string(kind_of(model));
  doc["schema"] = schema.names();
  doc["scaler"] = {{"mean", scaler.mean},
                   {"stddev", scaler.stddev},
                   {"passthrough", scaler.passthrough}};
  doc["config"] = config_to_json(config);
  doc["params"] = params_to_json(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DomainError("unparseable model file " + path.string() + ": " +
                      e.what());
  }
  if (doc.value("format", "") != "hitforge-model") {
    throw DomainError(path.string() + " is not a model file");
  }
  LoadedModel loaded;
  const ModelKind kind = model_kind_from_string(doc.at("kind").get<std::string>());
  const auto names = doc.at("schema").get<std::vector<std::string>>();
  if (!names.empty()) loaded.schema = feat::FeatureSchema(names);
  loaded.scaler.mean = doc.at("scaler").at("mean").get<std::vector<double>>();
  loaded.scaler.stddev =
      doc.at("scaler").at("stddev").get<std::vector<double>>();
  loaded.scaler.passthrough =
      doc.at("scaler").at("passthrough").get<std::vector<bool>>();
  loaded.config = config_from_json(doc.at("config"));
  loaded.model = params_from_json(kind, doc.at("params"));
  return loaded;
}

}  // namespace hitforge::models
