#include "hitforge/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <omp.h>

#include "hitforge/csv.hpp"
#include "hitforge/features.hpp"
#include "hitforge/rng.hpp"

namespace hitforge::search {

using nlohmann::json;

void ParamDomain::validate() const {
  if (name.empty()) throw DomainError("unnamed sweep parameter");
  if (kind == Kind::choices) {
    if (choices.empty()) {
      throw DomainError("parameter '" + name + "' has an empty domain");
    }
  } else {
    if (!(lo < hi)) {
      throw DomainError("parameter '" + name + "' has unordered bounds");
    }
    if (kind == Kind::log_uniform && !(lo > 0.0)) {
      throw DomainError("parameter '" + name +
                        "' needs positive bounds for log-uniform sampling");
    }
  }
}

SweepSpec SweepSpec::from_json(const json& doc) {
  SweepSpec spec;
  spec.model = models::model_kind_from_string(doc.at("model").get<std::string>());
  spec.n_trials = doc.value("n_trials", 1);
  if (spec.n_trials < 1) throw DomainError("n_trials must be >= 1");
  spec.master_seed = doc.value("seed", 0ull);
  for (const auto& [name, body] : doc.at("params").items()) {
    ParamDomain d;
    d.name = name;
    if (body.contains("choices")) {
      d.kind = ParamDomain::Kind::choices;
      for (const auto& c : body.at("choices")) d.choices.push_back(c);
    } else if (body.contains("uniform")) {
      d.kind = ParamDomain::Kind::uniform;
      d.lo = body.at("uniform").at(0).get<double>();
      d.hi = body.at("uniform").at(1).get<double>();
    } else if (body.contains("log_uniform")) {
      d.kind = ParamDomain::Kind::log_uniform;
      d.lo = body.at("log_uniform").at(0).get<double>();
      d.hi = body.at("log_uniform").at(1).get<double>();
    } else {
      throw DomainError("parameter '" + name +
                        "' needs choices, uniform or log_uniform");
    }
    d.integer = body.value("integer", false);
    d.validate();
    spec.domains.push_back(std::move(d));
  }
  if (spec.domains.empty()) throw DomainError("sweep has no parameters");
  return spec;
}

json SweepSpec::to_json() const {
  json doc;
  doc["model"] = models::to_string(model);
  doc["n_trials"] = n_trials;
  doc["seed"] = master_seed;
  json params = json::object();
  for (const auto& d : domains) {
    json body;
    switch (d.kind) {
      case ParamDomain::Kind::choices: body["choices"] = d.choices; break;
      case ParamDomain::Kind::uniform: body["uniform"] = {d.lo, d.hi}; break;
      case ParamDomain::Kind::log_uniform:
        body["log_uniform"] = {d.lo, d.hi};
        break;
    }
    if (d.integer) body["integer"] = true;
    params[d.name] = std::move(body);
  }
  doc["params"] = std::move(params);
  return doc;
}

SweepSpec SweepSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open sweep file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DomainError("unparseable sweep file: " + std::string(e.what()));
  }
  return from_json(doc);
}

void apply_params(models::ModelConfig& config, models::ModelKind kind,
                  const json& params) {
  for (const auto& [name, value] : params.items()) {
    using models::ModelKind;
    if (kind == ModelKind::lr && name == "epochs") {
      config.lr.epochs = value.get<int>();
    } else if (kind == ModelKind::lr && name == "learning_rate") {
      config.lr.learning_rate = value.get<double>();
    } else if (kind == ModelKind::nn && name == "epochs") {
      config.mlp.epochs = value.get<int>();
    } else if (kind == ModelKind::nn && name == "learning_rate") {
      config.mlp.learning_rate = value.get<double>();
    } else if (kind == ModelKind::nn && name == "hidden_units") {
      config.mlp.hidden_units = value.get<int>();
    } else if (kind == ModelKind::nn && name == "batch_size") {
      config.mlp.batch_size = value.get<int>();
    } else if (kind == ModelKind::rf && name == "n_estimators") {
      config.forest.n_estimators = value.get<int>();
    } else if (kind == ModelKind::rf && name == "max_features") {
      config.forest.max_features = value.get<int>();
    } else if (kind == ModelKind::rf && name == "min_samples_split") {
      config.forest.min_samples_split = value.get<int>();
    } else if (kind == ModelKind::svm && name == "gamma") {
      config.svm.gamma = value.get<double>();
    } else if (kind == ModelKind::svm && name == "c") {
      config.svm.c = value.get<double>();
    } else {
      throw DomainError("parameter '" + name + "' does not apply to model " +
                        models::to_string(kind));
    }
  }
  config.validate();
}

namespace {

json sample_params(const SweepSpec& spec, int trial_index) {
  Rng rng(derive_seed(spec.master_seed, 0xA11CE,
                      static_cast<std::uint64_t>(trial_index)));
  json params = json::object();
  for (const auto& d : spec.domains) {
    switch (d.kind) {
      case ParamDomain::Kind::choices:
        params[d.name] = d.choices[rng.bounded(d.choices.size())];
        break;
      case ParamDomain::Kind::uniform: {
        const double v = rng.uniform(d.lo, d.hi);
        params[d.name] = d.integer ? json(std::llround(v)) : json(v);
        break;
      }
      case ParamDomain::Kind::log_uniform: {
        const double v =
            std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)));
        params[d.name] = d.integer ? json(std::llround(v)) : json(v);
        break;
      }
    }
  }
  return params;
}

Trial run_trial(const SweepSpec& spec, const feat::FeatureMatrix& train,
                const feat::FeatureMatrix& validation, int index,
                json params) {
  Trial trial;
  trial.index = index;
  trial.params = std::move(params);
  trial.seed =
      derive_seed(spec.master_seed, 0x5EED, static_cast<std::uint64_t>(index));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    models::ModelConfig config;
    config.seed = trial.seed;
    apply_params(config, spec.model, trial.params);
    // Trials are already parallel; each one trains single-threaded.
    const models::TrainedModel model =
        models::train(spec.model, train, config, 1);
    std::vector<int> predicted(validation.rows);
    for (std::size_t r = 0; r < validation.rows; ++r) {
      predicted[r] =
          models::predict(model, validation.row(r), config.threshold).label;
    }
    eval::MetricsReport report;
    report.model = models::to_string(spec.model);
    report.split = "val";
    report.cm = eval::confusion(predicted, validation.labels);
    report.m = eval::metrics(report.cm);
    trial.report = std::move(report);
  } catch (const std::exception& e) {
    trial.error = e.what();
  }
  trial.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return trial;
}

void rank(std::vector<Trial>& trials) {
  std::sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (a.accuracy() != b.accuracy()) return a.accuracy() > b.accuracy();
    return a.index < b.index;
  });
}

struct PreparedSplit {
  feat::FeatureMatrix train;
  feat::FeatureMatrix validation;
};

PreparedSplit prepare(const corpus::CorpusSplit& data) {
  const auto schema = feat::FeatureSchema::defaults();
  const auto scaler = feat::fit_scaler(data.train, schema);
  return {feat::build_matrix(data.train, schema, scaler),
          feat::build_matrix(data.validation, schema, scaler)};
}

std::vector<Trial> run_all(const SweepSpec& spec,
                           const corpus::CorpusSplit& data,
                           const std::vector<json>& param_sets, int workers) {
  const PreparedSplit prepared = prepare(data);
  std::vector<Trial> trials(param_sets.size());
  if (workers <= 0) workers = omp_get_max_threads();
  const int n = static_cast<int>(param_sets.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < n; ++i) {
    trials[static_cast<std::size_t>(i)] =
        run_trial(spec, prepared.train, prepared.validation, i,
                  param_sets[static_cast<std::size_t>(i)]);
  }
  rank(trials);
  return trials;
}

}  // namespace

std::vector<Trial> random_search(const SweepSpec& spec,
                                 const corpus::CorpusSplit& data, int workers) {
  if (spec.n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  std::vector<json> param_sets;
  param_sets.reserve(static_cast<std::size_t>(spec.n_trials));
  for (int i = 0; i < spec.n_trials; ++i) {
    param_sets.push_back(sample_params(spec, i));
  }
  return run_all(spec, data, param_sets, workers);
}

std::vector<Trial> grid_search(const SweepSpec& spec,
                               const corpus::CorpusSplit& data, int workers) {
  for (const auto& d : spec.domains) {
    if (d.kind != ParamDomain::Kind::choices) {
      throw DomainError("grid search requires finite domains; parameter '" +
                        d.name + "' is a range");
    }
  }
  // Odometer over declared domains, last domain fastest.
  std::vector<json> param_sets;
  std::vector<std::size_t> idx(spec.domains.size(), 0);
  while (true) {
    json params = json::object();
    for (std::size_t d = 0; d < spec.domains.size(); ++d) {
      params[spec.domains[d].name] = spec.domains[d].choices[idx[d]];
    }
    param_sets.push_back(std::move(params));
    std::size_t d = spec.domains.size();
    while (d > 0) {
      --d;
      if (++idx[d] < spec.domains[d].choices.size()) break;
      idx[d] = 0;
      if (d == 0) goto done;
    }
  }
done:
  return run_all(spec, data, param_sets, workers);
}

std::vector<Trial> rerun_serial(const SweepSpec& spec,
                                const corpus::CorpusSplit& data,
                                const std::vector<Trial>& ranked) {
  const PreparedSplit prepared = prepare(data);
  std::vector<Trial> trials;
  trials.reserve(ranked.size());
  for (const auto& t : ranked) {
    trials.push_back(
        run_trial(spec, prepared.train, prepared.validation, t.index, t.params));
  }
  rank(trials);
  return trials;
}

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<Trial>& ranked) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << "rank,trial,params,accuracy,precision,recall,wall_ms,error\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const Trial& t = ranked[i];
    out << i << ',' << t.index << ',' << csvio::escape(t.params.dump()) << ',';
    if (t.ok()) {
      out << eval::format_metric(t.report->m.accuracy) << ','
          << eval::format_metric(t.report->m.precision) << ','
          << eval::format_metric(t.report->m.recall);
    } else {
      out << "NA,NA,NA";
    }
    out << ',' << csvio::format_fixed(t.wall_ms, 3) << ','
        << csvio::escape(t.error) << '\n';
  }
}

void write_best_config(const std::filesystem::path& path, const SweepSpec& spec,
                       const Trial& best) {
  if (!best.ok()) throw DomainError("best trial failed; nothing to write");
  json doc;
  doc["model"] = models::to_string(spec.model);
  doc["seed"] = best.seed;
  doc["params"] = best.params;
  doc["validation_accuracy"] = best.report->m.accuracy;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace hitforge::search
