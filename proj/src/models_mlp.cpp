#include <algorithm>
#include <cmath>
#include <numeric>

#include "hitforge/models.hpp"
#include "hitforge/rng.hpp"

namespace hitforge::models {

namespace {

// Packed layout: hidden weights (h x d row-major), hidden biases (h),
// output weights (h), output bias (1).
struct ParamView {
  const double* w1;
  const double* b1;
  const double* w2;
  const double* b2;
};

ParamView view(const std::vector<double>& params, std::size_t d, std::size_t h) {
  ParamView v;
  v.w1 = params.data();
  v.b1 = params.data() + h * d;
  v.w2 = params.data() + h * d + h;
  v.b2 = params.data() + h * d + 2 * h;
  return v;
}

double forward(const ParamView& p, std::size_t d, std::size_t h,
               std::span<const double> x, std::vector<double>& hidden) {
  hidden.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    double a = p.b1[j];
    const double* w = p.w1 + j * d;
    for (std::size_t i = 0; i < d; ++i) a += w[i] * x[i];
    hidden[j] = a > 0.0 ? a : 0.0;  // ReLU
  }
  double z = *p.b2;
  for (std::size_t j = 0; j < h; ++j) z += p.w2[j] * hidden[j];
  return z;
}

double stable_ce(double z, int y) {
  return std::max(z, 0.0) - static_cast<double>(y) * z +
         std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

std::size_t mlp_param_count(std::size_t input_dim, std::size_t hidden_units) {
  return hidden_units * input_dim + 2 * hidden_units + 1;
}

double MlpModel::predict_proba(std::span<const double> x) const {
  std::vector<double> hidden;
  const double z =
      forward(view(params, input_dim, hidden_units), input_dim, hidden_units,
              x, hidden);
  return sigmoid(z);
}

double mlp_loss_and_gradient(const std::vector<double>& params,
                             std::size_t input_dim, std::size_t hidden_units,
                             const feat::FeatureMatrix& m,
                             std::span<const std::size_t> batch,
                             std::span<double> grad) {
  const std::size_t d = input_dim;
  const std::size_t h = hidden_units;
  if (params.size() != mlp_param_count(d, h) || grad.size() != params.size()) {
    throw std::invalid_argument("mlp gradient: shape mismatch");
  }
  if (batch.empty()) throw std::invalid_argument("mlp gradient: empty batch");

  const ParamView p = view(params, d, h);
  std::fill(grad.begin(), grad.end(), 0.0);
  double* gw1 = grad.data();
  double* gb1 = grad.data() + h * d;
  double* gw2 = grad.data() + h * d + h;
  double* gb2 = grad.data() + h * d + 2 * h;

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> hidden;
  double loss = 0.0;
  for (const std::size_t row : batch) {
    const auto x = m.row(row);
    const int y = m.labels[row];
    const double z = forward(p, d, h, x, hidden);
    loss += stable_ce(z, y) * inv_n;

    const double dz = (sigmoid(z) - static_cast<double>(y)) * inv_n;
    *gb2 += dz;
    for (std::size_t j = 0; j < h; ++j) {
      gw2[j] += dz * hidden[j];
      if (hidden[j] > 0.0) {  // ReLU gate
        const double da = dz * p.w2[j];
        gb1[j] += da;
        double* gw = gw1 + j * d;
        for (std::size_t i = 0; i < d; ++i) gw[i] += da * x[i];
      }
    }
  }
  return loss;
}

MlpModel train_mlp(const feat::FeatureMatrix& data, const ModelConfig& config) {
  config.validate();
  bool has0 = false, has1 = false;
  for (int y : data.labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) {
    throw DomainError("training data must contain both classes");
  }
  const std::size_t batch_size = static_cast<std::size_t>(config.mlp.batch_size);
  if (data.rows < batch_size) {
    throw DomainError("training set smaller than one mini-batch");
  }

  const std::size_t d = data.cols;
  const std::size_t h = static_cast<std::size_t>(config.mlp.hidden_units);

  MlpModel model;
  model.input_dim = d;
  model.hidden_units = h;
  model.params.assign(mlp_param_count(d, h), 0.0);

  // He-style init for the ReLU layer, 1/sqrt(h) for the readout.
  Rng init_rng(derive_seed(config.seed, 0x3117));
  const double w1_scale = std::sqrt(2.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < h * d; ++i) {
    model.params[i] = init_rng.normal() * w1_scale;
  }
  const double w2_scale = std::sqrt(1.0 / static_cast<double>(h));
  for (std::size_t j = 0; j < h; ++j) {
    model.params[h * d + h + j] = init_rng.normal() * w2_scale;
  }

  auto state = RmspropState::init(model.params.size(), config.mlp.learning_rate,
                                  config.mlp.rho, config.mlp.epsilon);
  std::vector<double> grad(model.params.size());
  std::vector<std::size_t> order(data.rows);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.mlp.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed, 0x5FFE,
                                static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < data.rows; begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, data.rows);
      mlp_loss_and_gradient(model.params, d, h, data,
                            std::span(order).subspan(begin, end - begin), grad);
      rmsprop_step(model.params, grad, state);
    }
  }
  return model;
}

}  // namespace hitforge::models
