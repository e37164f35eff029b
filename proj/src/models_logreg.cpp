#include <cmath>

#include "hitforge/models.hpp"

namespace hitforge::models {

namespace {

void check_binary_labels(const feat::FeatureMatrix& m) {
  bool has0 = false, has1 = false;
  for (int y : m.labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw DomainError("labels must be 0/1");
  }
  if (!has0 || !has1) {
    throw DomainError("training data must contain both classes");
  }
}

}  // namespace

double LogRegModel::decision(std::span<const double> x) const {
  double z = beta[0];
  for (std::size_t j = 0; j < x.size(); ++j) z += beta[j + 1] * x[j];
  return z;
}

double LogRegModel::predict_proba(std::span<const double> x) const {
  return sigmoid(decision(x));
}

double nll(const std::vector<double>& beta, const feat::FeatureMatrix& m) {
  if (beta.size() != m.cols + 1) {
    throw std::invalid_argument("nll: beta must have cols+1 entries");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    double z = beta[0];
    const auto x = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) z += beta[j + 1] * x[j];
    // -[y log s(z) + (1-y) log(1-s(z))] = log(1+e^z) - y z, computed as
    // max(z,0) - y z + log1p(e^{-|z|}) to stay finite for any z.
    loss += std::max(z, 0.0) - static_cast<double>(m.labels[i]) * z +
            std::log1p(std::exp(-std::abs(z)));
  }
  return loss;
}

void nll_gradient(const std::vector<double>& beta,
                  const feat::FeatureMatrix& m, std::span<double> grad) {
  if (beta.size() != m.cols + 1 || grad.size() != beta.size()) {
    throw std::invalid_argument("nll_gradient: shape mismatch");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto x = m.row(i);
    double z = beta[0];
    for (std::size_t j = 0; j < m.cols; ++j) z += beta[j + 1] * x[j];
    const double residual = sigmoid(z) - static_cast<double>(m.labels[i]);
    grad[0] += residual;
    for (std::size_t j = 0; j < m.cols; ++j) grad[j + 1] += residual * x[j];
  }
}

LogRegModel train_logreg(const feat::FeatureMatrix& data,
                         const ModelConfig& config) {
  config.validate();
  check_binary_labels(data);

  LogRegModel model;
  model.beta.assign(data.cols + 1, 0.0);
  const double baseline = nll(model.beta, data);

  auto state = RmspropState::init(model.beta.size(), config.lr.learning_rate,
                                  config.lr.rho, config.lr.epsilon);
  std::vector<double> grad(model.beta.size());
  for (int epoch = 0; epoch < config.lr.epochs; ++epoch) {
    nll_gradient(model.beta, data, grad);
    rmsprop_step(model.beta, grad, state);
  }

  const double fitted = nll(model.beta, data);
  if (!(fitted <= baseline + 1e-9)) {
    throw DomainError("logistic regression failed to improve on beta = 0");
  }
  return model;
}

}  // namespace hitforge::models
