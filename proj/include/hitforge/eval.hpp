#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hitforge/types.hpp"
#include "json.hpp"

namespace hitforge::eval {

// Positive class = hit.
struct ConfusionMatrix {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  long long total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(std::span<const int> predictions,
                          std::span<const int> labels);

// Zero-denominator precision/recall stay empty rather than collapsing to 0
// or NaN; report files render them as "NA".
struct Metrics {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
};

Metrics metrics(const ConfusionMatrix& cm);

struct MetricsReport {
  std::string model;  // "lr", "nn", "rf", "svm"
  std::string split;  // "train", "val", "test"
  ConfusionMatrix cm;
  Metrics m;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& doc);
};

// Report cell: 4 decimals, or "NA" for undefined metrics.
std::string format_metric(const std::optional<double>& value);

// Writes, deterministically:
//   table1.csv          one row per model, accuracy/precision/recall x test/val
//   confusion_<model>_<split>.csv
//   accuracy_bars.tsv   (model, split, accuracy) for external plotting
//   accuracy_bars.svg   rendered grouped bar chart
// Model rows keep first-appearance order of `reports`.
void emit_report(const std::vector<MetricsReport>& reports,
                 const std::filesystem::path& out_dir);

}  // namespace hitforge::eval
