#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hitforge/rng.hpp"

namespace oracles {

using hitforge::feat::FeatureMatrix;
using hitforge::models::Tree;
using hitforge::models::TreeNode;

namespace {

double node_gini(long long c0, long long c1) {
  const double n = static_cast<double>(c0 + c1);
  const double p0 = static_cast<double>(c0) / n;
  const double p1 = static_cast<double>(c1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct BruteSplit {
  int feature;
  double threshold;
  double weighted;
};

// Every (feature, midpoint) candidate, recounted from scratch.
std::optional<BruteSplit> brute_best_split(const FeatureMatrix& m,
                                           const std::vector<std::size_t>& rows) {
  long long total1 = 0;
  for (const auto r : rows) total1 += m.labels[r];
  const long long total0 = static_cast<long long>(rows.size()) - total1;
  if (total0 == 0 || total1 == 0) return std::nullopt;
  const double parent = node_gini(total0, total1);

  std::optional<BruteSplit> best;
  for (int f = 0; f < static_cast<int>(m.cols); ++f) {
    std::set<double> values;
    for (const auto r : rows) values.insert(m.at(r, static_cast<std::size_t>(f)));
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double threshold = (sorted[i] + sorted[i + 1]) / 2.0;
      long long l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (const auto r : rows) {
        const bool left = m.at(r, static_cast<std::size_t>(f)) <= threshold;
        if (left) {
          (m.labels[r] ? l1 : l0) += 1;
        } else {
          (m.labels[r] ? r1 : r0) += 1;
        }
      }
      if (l0 + l1 == 0 || r0 + r1 == 0) continue;
      const double weighted =
          (static_cast<double>(l0 + l1) * node_gini(l0, l1) +
           static_cast<double>(r0 + r1) * node_gini(r0, r1)) /
          static_cast<double>(rows.size());
      if (!best || weighted < best->weighted) {
        best = BruteSplit{f, threshold, weighted};
      }
      // Equal scores keep the earlier (lower feature, lower threshold)
      // candidate because iteration ascends and the comparison is strict.
    }
  }
  if (best && !(parent - best->weighted > 0.0)) return std::nullopt;
  return best;
}

int grow_reference(const FeatureMatrix& m, std::vector<std::size_t>& rows,
                   int min_samples_split, Tree& tree) {
  long long c1 = 0;
  for (const auto r : rows) c1 += m.labels[r];
  const long long c0 = static_cast<long long>(rows.size()) - c1;
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, c0, c1});

  if (rows.size() < static_cast<std::size_t>(min_samples_split) || c0 == 0 ||
      c1 == 0) {
    return index;
  }
  const auto split = brute_best_split(m, rows);
  if (!split) return index;

  std::vector<std::size_t> left, right;
  for (const auto r : rows) {
    (m.at(r, static_cast<std::size_t>(split->feature)) <= split->threshold
         ? left
         : right)
        .push_back(r);
  }
  tree.nodes[index].feature = split->feature;
  tree.nodes[index].threshold = split->threshold;
  tree.nodes[index].left = grow_reference(m, left, min_samples_split, tree);
  tree.nodes[index].right = grow_reference(m, right, min_samples_split, tree);
  return index;
}

}  // namespace

Tree cart_reference(const FeatureMatrix& m, int min_samples_split) {
  Tree tree;
  std::vector<std::size_t> rows(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) rows[i] = i;
  grow_reference(m, rows, min_samples_split, tree);
  return tree;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> at, double h) {
  std::vector<double> grad(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = at[i];
    at[i] = saved + h;
    const double hi = f(at);
    at[i] = saved - h;
    const double lo = f(at);
    at[i] = saved;
    grad[i] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor) {
  double scale = floor;
  for (const double v : a) scale = std::max(scale, std::abs(v));
  for (const double v : b) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst / scale;
}

double svm_dual_objective(std::span<const double> alpha,
                          std::span<const int> y,
                          const std::vector<std::vector<double>>& kernel) {
  const std::size_t n = alpha.size();
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) obj += alpha[i];
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
    }
  }
  return obj - 0.5 * quad;
}

std::vector<double> random_feasible_alpha(std::span<const int> y, double c,
                                          std::uint64_t seed) {
  hitforge::Rng rng(seed);
  const std::size_t n = y.size();
  std::vector<double> alpha(n);
  for (auto& a : alpha) a = rng.uniform(0.0, c);
  for (int pass = 0; pass < 200; ++pass) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += alpha[i] * y[i];
    if (std::abs(s) < 1e-12) break;
    const double shift = s / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      alpha[i] = std::clamp(alpha[i] - shift * y[i], 0.0, c);
    }
  }
  // Exact repair on one free coordinate so the equality holds to machine
  // precision.
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += alpha[i] * y[i];
  for (std::size_t i = 0; i < n && std::abs(s) > 0; ++i) {
    const double fixed = std::clamp(alpha[i] - s * y[i], 0.0, c);
    s += (fixed - alpha[i]) * y[i];
    alpha[i] = fixed;
  }
  return alpha;
}

double svm_kkt_violation(const hitforge::models::SvmModel& model,
                         const hitforge::feat::FeatureMatrix& train,
                         double c) {
  // Recompute decision values directly from the model definition.
  double worst = 0.0;
  for (std::size_t i = 0; i < train.rows; ++i) {
    const auto x = train.row(i);
    const int y = train.labels[i] == 1 ? 1 : -1;
    double f = model.bias;
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
      double dist2 = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double diff = model.support_vectors[s][d] - x[d];
        dist2 += diff * diff;
      }
      f += model.alphas[s] * model.labels[s] * std::exp(-model.gamma * dist2);
    }
    // Recover this row's alpha: zero unless it is a stored support vector.
    double alpha = 0.0;
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
      bool same = true;
      for (std::size_t d = 0; d < x.size(); ++d) {
        if (model.support_vectors[s][d] != x[d]) {
          same = false;
          break;
        }
      }
      if (same) {
        alpha = model.alphas[s];
        break;
      }
    }
    const double margin = y * f;
    double violation = 0.0;
    if (alpha <= 1e-8) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (alpha >= c - 1e-8) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::abs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

Counts recount(std::span<const int> predictions, std::span<const int> labels) {
  Counts c;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == 1) {
      (labels[i] == 1 ? c.tp : c.fp) += 1;
    } else {
      (labels[i] == 1 ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

}  // namespace oracles
