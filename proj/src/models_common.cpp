#include <cmath>

#include "hitforge/models.hpp"

namespace hitforge::models {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "lr") return ModelKind::lr;
  if (s == "nn") return ModelKind::nn;
  if (s == "rf") return ModelKind::rf;
  if (s == "svm") return ModelKind::svm;
  throw DomainError("unknown model kind '" + s + "' (expected lr|nn|rf|svm)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lr: return "lr";
    case ModelKind::nn: return "nn";
    case ModelKind::rf: return "rf";
    case ModelKind::svm: return "svm";
  }
  throw DomainError("bad model kind value");
}

void ModelConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DomainError("decision threshold must lie in (0,1)");
  }
  if (lr.epochs < 1 || mlp.epochs < 1) throw DomainError("epochs must be >= 1");
  if (lr.learning_rate <= 0 || mlp.learning_rate <= 0) {
    throw DomainError("learning rate must be positive");
  }
  if (mlp.hidden_units < 1) throw DomainError("hidden_units must be >= 1");
  if (mlp.batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (forest.n_estimators < 1) throw DomainError("n_estimators must be >= 1");
  if (forest.max_features < 1) throw DomainError("max_features must be >= 1");
  if (forest.min_samples_split < 2) {
    throw DomainError("min_samples_split must be >= 2");
  }
  if (!(svm.gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(svm.c > 0.0)) throw DomainError("C must be positive");
  if (svm.max_passes < 1) throw DomainError("max_passes must be >= 1");
}

RmspropState RmspropState::init(std::size_t n, double learning_rate,
                                double rho, double epsilon) {
  RmspropState s;
  s.v.assign(n, 0.0);
  s.learning_rate = learning_rate;
  s.rho = rho;
  s.epsilon = epsilon;
  return s;
}

void rmsprop_step(std::span<double> params, std::span<const double> grads,
                  RmspropState& state) {
  if (params.size() != grads.size() || params.size() != state.v.size()) {
    throw std::invalid_argument("rmsprop_step: shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.v[i] = state.rho * state.v[i] + (1.0 - state.rho) * g * g;
    params[i] -= state.learning_rate * g / std::sqrt(state.v[i] + state.epsilon);
  }
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

TrainedModel train(ModelKind kind, const feat::FeatureMatrix& data,
                   const ModelConfig& config, int workers) {
  switch (kind) {
    case ModelKind::lr: return train_logreg(data, config);
    case ModelKind::nn: return train_mlp(data, config);
    case ModelKind::rf: return train_forest(data, config, workers);
    case ModelKind::svm: return train_svm(data, config);
  }
  throw DomainError("bad model kind value");
}

Prediction predict(const TrainedModel& model, std::span<const double> x,
                   double threshold) {
  return std::visit(
      [&](const auto& m) -> Prediction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogRegModel>) {
          if (x.size() + 1 != m.beta.size()) {
            throw std::invalid_argument("predict: dimension mismatch");
          }
          const double p = m.predict_proba(x);
          return {p, p > threshold ? 1 : 0};
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          if (x.size() != m.input_dim) {
            throw std::invalid_argument("predict: dimension mismatch");
          }
          const double p = m.predict_proba(x);
          return {p, p > threshold ? 1 : 0};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          const auto [p, label] = predict_forest(m, x);
          return {p, label};
        } else {
          if (m.support_vectors.empty() ||
              x.size() != m.support_vectors.front().size()) {
            throw std::invalid_argument("predict: dimension mismatch");
          }
          const double f = m.decision(x);
          return {f, f > 0.0 ? 1 : 0};
        }
      },
      model);
}

ModelKind kind_of(const TrainedModel& model) {
  if (std::holds_alternative<LogRegModel>(model)) return ModelKind::lr;
  if (std::holds_alternative<MlpModel>(model)) return ModelKind::nn;
  if (std::holds_alternative<ForestModel>(model)) return ModelKind::rf;
  return ModelKind::svm;
}

}  // namespace hitforge::models
