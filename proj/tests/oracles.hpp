#pragma once

// Independent reference implementations backing the test suite. Everything
// here recomputes from first principles and must stay decoupled from the
// library code paths it checks.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hitforge/features.hpp"
#include "hitforge/models.hpp"

namespace oracles {

// Brute-force CART: exhaustive scan of every (feature, midpoint threshold)
// pair at every node, weighted-Gini objective, lowest-feature then
// lowest-threshold tie-break, preorder node layout. No feature sampling, no
// bootstrap.
hitforge::models::Tree cart_reference(const hitforge::feat::FeatureMatrix& m,
                                      int min_samples_split);

// Central finite differences of a scalar function. h defaults to the value
// the gradient-check tolerances are stated against.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> at, double h = 1e-6);

// max_i |a_i - b_i| / max(||a||_inf, ||b||_inf, floor)
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-12);

// Dual objective W(alpha) = sum alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double svm_dual_objective(std::span<const double> alpha,
                          std::span<const int> y,
                          const std::vector<std::vector<double>>& kernel);

// A random point of the feasible region {0 <= alpha <= C, sum alpha y = 0},
// via alternating projection. Deterministic given the seed.
std::vector<double> random_feasible_alpha(std::span<const int> y, double c,
                                          std::uint64_t seed);

// Independent KKT check of a trained model against its training set.
// Returns the largest violation found.
double svm_kkt_violation(const hitforge::models::SvmModel& model,
                         const hitforge::feat::FeatureMatrix& train,
                         double c);

struct Counts {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
};

// Naive recount of a confusion matrix.
Counts recount(std::span<const int> predictions, std::span<const int> labels);

}  // namespace oracles
