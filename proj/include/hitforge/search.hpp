#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hitforge/corpus.hpp"
#include "hitforge/eval.hpp"
#include "hitforge/models.hpp"
#include "json.hpp"

namespace hitforge::search {

// One hyperparameter domain: an explicit value list (grid and random) or a
// bounded range with a sampling law (random only).
struct ParamDomain {
  std::string name;
  enum class Kind { choices, uniform, log_uniform } kind = Kind::choices;
  std::vector<nlohmann::json> choices;
  double lo = 0.0;
  double hi = 0.0;
  bool integer = false;  // round sampled values

  void validate() const;
};

struct SweepSpec {
  models::ModelKind model = models::ModelKind::rf;
  int n_trials = 1;             // randomized search budget
  std::uint64_t master_seed = 0;
  std::vector<ParamDomain> domains;

  static SweepSpec from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  static SweepSpec load(const std::filesystem::path& path);
};

struct Trial {
  int index = -1;
  nlohmann::json params;  // sampled name -> value
  std::uint64_t seed = 0; // derived: pure function of (master seed, index)
  std::optional<eval::MetricsReport> report;  // validation split
  double wall_ms = 0.0;
  std::string error;  // non-empty when the trial failed

  bool ok() const { return error.empty(); }
  double accuracy() const { return report ? report->m.accuracy : -1.0; }
};

// Applies sampled parameter values onto the paper-default config for the
// model kind. Unknown names throw.
void apply_params(models::ModelConfig& config, models::ModelKind kind,
                  const nlohmann::json& params);

// Ranked by validation accuracy descending, ties by lower trial index;
// failures sort last. Identical output for any worker count.
std::vector<Trial> random_search(const SweepSpec& spec,
                                 const corpus::CorpusSplit& data, int workers);

// Evaluates exactly the Cartesian product of the (finite) domains, in
// declared-domain odometer order.
std::vector<Trial> grid_search(const SweepSpec& spec,
                               const corpus::CorpusSplit& data, int workers);

// Reference path used by the equivalence tests: same trials, plain loop.
std::vector<Trial> rerun_serial(const SweepSpec& spec,
                                const corpus::CorpusSplit& data,
                                const std::vector<Trial>& ranked);

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<Trial>& ranked);

// The winning trial's full ModelConfig, ready for `train`.
void write_best_config(const std::filesystem::path& path, const SweepSpec& spec,
                       const Trial& best);

}  // namespace hitforge::search
