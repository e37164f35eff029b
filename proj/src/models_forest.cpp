#include <algorithm>
#include <numeric>

#include <omp.h>

#include "hitforge/models.hpp"
#include "hitforge/rng.hpp"

namespace hitforge::models {

double gini(long long count0, long long count1) {
  const long long n = count0 + count1;
  if (n <= 0) throw std::invalid_argument("gini of an empty node");
  const double p0 = static_cast<double>(count0) / static_cast<double>(n);
  const double p1 = static_cast<double>(count1) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

double gini(std::span<const int> labels) {
  long long c1 = 0;
  for (int y : labels) c1 += y;
  return gini(static_cast<long long>(labels.size()) - c1, c1);
}

std::optional<SplitChoice> best_split(const feat::FeatureMatrix& m,
                                      std::span<const std::size_t> rows,
                                      std::span<const int> feature_subset) {
  if (rows.size() < 2) return std::nullopt;
  long long total1 = 0;
  for (const std::size_t r : rows) total1 += m.labels[r];
  const long long n = static_cast<long long>(rows.size());
  const long long total0 = n - total1;
  const double parent = gini(total0, total1);
  if (total0 == 0 || total1 == 0) return std::nullopt;  // already pure

  std::optional<SplitChoice> best;
  double best_weighted = parent;

  std::vector<std::pair<double, int>> column(rows.size());
  for (const int f : feature_subset) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {m.at(rows[i], static_cast<std::size_t>(f)),
                   m.labels[rows[i]]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    long long left0 = 0, left1 = 0;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      (column[i].second ? left1 : left0) += 1;
      if (column[i].first == column[i + 1].first) continue;
      const double threshold = (column[i].first + column[i + 1].first) / 2.0;
      const long long nl = left0 + left1;
      const long long nr = n - nl;
      const double weighted =
          (static_cast<double>(nl) * gini(left0, left1) +
           static_cast<double>(nr) * gini(total0 - left0, total1 - left1)) /
          static_cast<double>(n);
      // Strict < keeps the first candidate encountered; features ascend and
      // thresholds ascend within a feature, which is the documented
      // tie-break (lowest feature index, then lowest threshold).
      if (weighted < best_weighted) {
        best_weighted = weighted;
        best = SplitChoice{f, threshold, parent - weighted};
      }
    }
  }
  if (best && !(best->impurity_decrease > 0.0)) return std::nullopt;
  return best;
}

namespace {

// Preorder recursive construction; the node vector layout is part of the
// CART-oracle equivalence contract.
int grow(const feat::FeatureMatrix& m, const ForestConfig& config,
         std::vector<std::size_t>& rows, Rng& rng, Tree& tree) {
  long long c1 = 0;
  for (const std::size_t r : rows) c1 += m.labels[r];
  const long long c0 = static_cast<long long>(rows.size()) - c1;

  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, c0, c1});

  if (rows.size() < static_cast<std::size_t>(config.min_samples_split) ||
      c0 == 0 || c1 == 0) {
    return index;
  }

  // Fresh uniform feature sample per node, examined in ascending order so
  // the tie-break never depends on the draw order.
  const int d = static_cast<int>(m.cols);
  const int k = std::min(config.max_features, d);
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(d - i)));
    std::swap(all[i], all[j]);
  }
  std::vector<int> subset(all.begin(), all.begin() + k);
  std::sort(subset.begin(), subset.end());

  const auto choice = best_split(m, rows, subset);
  if (!choice) return index;

  std::vector<std::size_t> left_rows, right_rows;
  for (const std::size_t r : rows) {
    if (m.at(r, static_cast<std::size_t>(choice->feature)) <= choice->threshold) {
      left_rows.push_back(r);
    } else {
      right_rows.push_back(r);
    }
  }

  tree.nodes[index].feature = choice->feature;
  tree.nodes[index].threshold = choice->threshold;
  const int left = grow(m, config, left_rows, rng, tree);
  tree.nodes[index].left = left;
  const int right = grow(m, config, right_rows, rng, tree);
  tree.nodes[index].right = right;
  return index;
}

}  // namespace

Tree train_tree(const feat::FeatureMatrix& data, const ForestConfig& config,
                std::uint64_t seed) {
  Tree tree;
  tree.seed = seed;
  Rng rng(seed);

  std::vector<std::size_t> rows(data.rows);
  if (config.bootstrap) {
    for (std::size_t i = 0; i < data.rows; ++i) {
      rows[i] = static_cast<std::size_t>(rng.bounded(data.rows));
    }
  } else {
    std::iota(rows.begin(), rows.end(), 0);
  }
  grow(data, config, rows, rng, tree);
  return tree;
}

int Tree::vote(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& nd = nodes[i];
    i = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                : nd.right;
  }
  return nodes[i].count1 > nodes[i].count0 ? 1 : 0;
}

ForestModel train_forest(const feat::FeatureMatrix& data,
                         const ModelConfig& config, int workers) {
  config.validate();
  if (data.rows == 0) throw DomainError("empty training set");
  bool has0 = false, has1 = false;
  for (int y : data.labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) {
    throw DomainError("training data must contain both classes");
  }

  ForestModel model;
  model.input_dim = data.cols;
  model.trees.resize(static_cast<std::size_t>(config.forest.n_estimators));
  const int n = config.forest.n_estimators;
  if (workers <= 0) workers = omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int t = 0; t < n; ++t) {
    model.trees[static_cast<std::size_t>(t)] =
        train_tree(data, config.forest,
                   derive_seed(config.seed, 0xF03E57,
                               static_cast<std::uint64_t>(t)));
  }
  return model;
}

ForestModel train_forest_serial(const feat::FeatureMatrix& data,
                                const ModelConfig& config) {
  config.validate();
  if (data.rows == 0) throw DomainError("empty training set");
  ForestModel model;
  model.input_dim = data.cols;
  for (int t = 0; t < config.forest.n_estimators; ++t) {
    model.trees.push_back(train_tree(
        data, config.forest,
        derive_seed(config.seed, 0xF03E57, static_cast<std::uint64_t>(t))));
  }
  return model;
}

std::pair<double, int> predict_forest(const ForestModel& model,
                                      std::span<const double> x) {
  if (model.trees.empty()) throw DomainError("empty forest");
  if (x.size() != model.input_dim) {
    throw std::invalid_argument("predict_forest: dimension mismatch");
  }
  int votes = 0;
  for (const auto& tree : model.trees) votes += tree.vote(x);
  const double p =
      static_cast<double>(votes) / static_cast<double>(model.trees.size());
  return {p, p > 0.5 ? 1 : 0};
}

}  // namespace hitforge::models
