#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hitforge/types.hpp"

namespace hitforge::feat {

// The 15 predictor columns. popularity / weeks / rank / score are outcomes
// of chart success and may never enter a schema.
std::vector<std::string> default_schema_names();

bool is_flag_feature(const std::string& name);  // mode, explicit

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names);  // validates

  static FeatureSchema defaults();

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
};

double feature_value(const Track& track, const std::string& name);

// Train-fitted standardization. Means and population stddevs come from the
// training rows only; flag features pass through unscaled.
struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> passthrough;
};

ScalerStats fit_scaler(const std::vector<Track>& train,
                       const FeatureSchema& schema);

struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major
  std::vector<int> labels;
  FeatureSchema schema;
  ScalerStats scaler;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  // Raw matrix wrapper for tests and tools that bypass Track conversion;
  // the scaler is the identity.
  static FeatureMatrix from_raw(std::size_t rows, std::size_t cols,
                                std::vector<double> values,
                                std::vector<int> labels);
};

FeatureMatrix build_matrix(const std::vector<Track>& tracks,
                           const FeatureSchema& schema,
                           const ScalerStats& scaler);

// CSV form: header = schema names + "label", full-precision floats.
void write_matrix_csv(const std::filesystem::path& path,
                      const FeatureMatrix& m);
FeatureMatrix read_matrix_csv(const std::filesystem::path& path);

// Binary form, little-endian throughout:
//   magic "HFMX", u32 version,
//   u64 rows, u64 cols,
//   cols x (u32 name length, name bytes, f64 mean, f64 stddev, u8 passthrough),
//   rows x u8 labels,
//   rows*cols x f64 row-major values.
void write_matrix_binary(const std::filesystem::path& path,
                         const FeatureMatrix& m);
FeatureMatrix read_matrix_binary(const std::filesystem::path& path);

}  // namespace hitforge::feat
