#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hitforge/features.hpp"
#include "hitforge/types.hpp"

namespace hitforge::models {

enum class ModelKind { lr, nn, rf, svm };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

// Paper defaults throughout: LR full-batch MLE over 1000 epochs, MLP with
// 10 ReLU units / batch 32 / 1000 epochs, RF with 80 estimators /
// max_features 8 / min_samples_split 2 under Gini, RBF SVM with gamma 0.1
// and C 10. RMSprop constants are the standard lr 1e-3, rho 0.9, eps 1e-8.
struct LrConfig {
  int epochs = 1000;
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-8;
};

struct MlpConfig {
  int hidden_units = 10;
  int batch_size = 32;
  int epochs = 1000;
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-8;
};

struct ForestConfig {
  int n_estimators = 80;
  int max_features = 8;
  int min_samples_split = 2;
  bool bootstrap = true;
};

struct SvmConfig {
  double gamma = 0.1;
  double c = 10.0;
  double tolerance = 1e-3;
  int max_passes = 10000;
};

struct ModelConfig {
  std::uint64_t seed = 0;
  double threshold = 0.5;  // label 1 iff probability strictly above
  LrConfig lr;
  MlpConfig mlp;
  ForestConfig forest;
  SvmConfig svm;

  void validate() const;
};

// --- RMSprop ---

struct RmspropState {
  std::vector<double> v;  // squared-gradient accumulator, >= 0 elementwise
  double rho = 0.9;
  double learning_rate = 0.001;
  double epsilon = 1e-8;

  static RmspropState init(std::size_t n, double learning_rate, double rho,
                           double epsilon);
};

// v <- rho v + (1-rho) g^2 ; p <- p - lr g / sqrt(v + eps), elementwise.
void rmsprop_step(std::span<double> params, std::span<const double> grads,
                  RmspropState& state);

// --- logistic regression ---

struct LogRegModel {
  std::vector<double> beta;  // bias first, then one weight per feature

  double decision(std::span<const double> x) const;  // x^t beta with bias
  double predict_proba(std::span<const double> x) const;
};

// Numerically stable e^x / (1 + e^x); no overflow for |x| up to ~1e3.
double sigmoid(double x);

// Negative log of the Bernoulli likelihood, summed over rows. beta has
// m.cols + 1 entries, bias first.
double nll(const std::vector<double>& beta, const feat::FeatureMatrix& m);

// d(nll)/d(beta); grad must have beta.size() entries.
void nll_gradient(const std::vector<double>& beta,
                  const feat::FeatureMatrix& m, std::span<double> grad);

LogRegModel train_logreg(const feat::FeatureMatrix& data,
                         const ModelConfig& config);

// --- multilayer perceptron ---

struct MlpModel {
  std::size_t input_dim = 0;
  std::size_t hidden_units = 0;
  // Packed parameters: hidden weights (hidden x d, row-major), hidden
  // biases, output weights, output bias.
  std::vector<double> params;

  double predict_proba(std::span<const double> x) const;
};

std::size_t mlp_param_count(std::size_t input_dim, std::size_t hidden_units);

// Mean cross-entropy over the index subset plus its full parameter
// gradient. Exposed so finite differences can check the backward pass.
double mlp_loss_and_gradient(const std::vector<double>& params,
                             std::size_t input_dim, std::size_t hidden_units,
                             const feat::FeatureMatrix& m,
                             std::span<const std::size_t> batch,
                             std::span<double> grad);

MlpModel train_mlp(const feat::FeatureMatrix& data, const ModelConfig& config);

// --- random forest ---

// 1 - p0^2 - p1^2 for a two-class node.
double gini(long long count0, long long count1);
double gini(std::span<const int> labels);

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity_decrease = 0.0;  // parent gini minus weighted child gini
};

// Best midpoint split over `feature_subset` (indices into columns of m,
// examined in ascending order). Rows with value <= threshold go left.
// Ties keep the lowest feature index, then the lowest threshold. Returns
// nullopt when no candidate strictly reduces impurity.
std::optional<SplitChoice> best_split(const feat::FeatureMatrix& m,
                                      std::span<const std::size_t> rows,
                                      std::span<const int> feature_subset);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  long long count0 = 0;  // training labels that reached this node
  long long count1 = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // preorder; nodes[0] is the root
  std::uint64_t seed = 0;

  // Majority class at the reached leaf; leaf ties vote 0.
  int vote(std::span<const double> x) const;
};

struct ForestModel {
  std::size_t input_dim = 0;
  std::vector<Tree> trees;
};

Tree train_tree(const feat::FeatureMatrix& data, const ForestConfig& config,
                std::uint64_t seed);

// Parallel over trees; the assembled forest is identical for any worker
// count because every tree draws from its own derived seed.
ForestModel train_forest(const feat::FeatureMatrix& data,
                         const ModelConfig& config, int workers = 0);

// Reference path kept for equivalence tests and the benchmark.
ForestModel train_forest_serial(const feat::FeatureMatrix& data,
                                const ModelConfig& config);

// probability = fraction of trees voting hit; label 1 iff probability >
// 0.5, so an exact tie yields 0.
std::pair<double, int> predict_forest(const ForestModel& model,
                                      std::span<const double> x);

// --- support vector machine ---

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma);

struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas;  // in (0, C]
  std::vector<int> labels;     // -1 / +1
  double bias = 0.0;
  double gamma = 0.1;

  double decision(std::span<const double> x) const;
};

class SvmConvergenceError : public DomainError {
 public:
  SvmConvergenceError(const std::string& msg, double last_violation)
      : DomainError(msg), last_kkt_violation(last_violation) {}
  double last_kkt_violation;
};

// Soft-margin dual via simplified sequential minimal optimization: the
// first index sweeps KKT violators, the second comes from a seeded random
// stream. Throws SvmConvergenceError when max_passes sweeps do not clear
// every violation.
SvmModel train_svm(const feat::FeatureMatrix& data, const ModelConfig& config);

// --- uniform prediction surface ---

using TrainedModel = std::variant<LogRegModel, MlpModel, ForestModel, SvmModel>;

struct Prediction {
  double value = 0.0;  // probability (lr/nn/rf) or decision value (svm)
  int label = 0;
};

TrainedModel train(ModelKind kind, const feat::FeatureMatrix& data,
                   const ModelConfig& config, int workers = 0);

// LR/MLP: label 1 iff p > threshold. RF: majority vote, ties to 0.
// SVM: label 1 iff the decision value is positive.
Prediction predict(const TrainedModel& model, std::span<const double> x,
                   double threshold = 0.5);

ModelKind kind_of(const TrainedModel& model);

// Self-describing JSON persistence: kind, schema, scaler, hyperparameters
// and parameters with round-trip float precision.
void save_model(const std::filesystem::path& path, const TrainedModel& model,
                const feat::FeatureSchema& schema,
                const feat::ScalerStats& scaler, const ModelConfig& config);

struct LoadedModel {
  TrainedModel model;
  feat::FeatureSchema schema;
  feat::ScalerStats scaler;
  ModelConfig config;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace hitforge::models
