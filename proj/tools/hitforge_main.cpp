#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hitforge/corpus.hpp"
#include "hitforge/eval.hpp"
#include "hitforge/features.hpp"
#include "hitforge/ingest.hpp"
#include "hitforge/manifest.hpp"
#include "hitforge/models.hpp"
#include "hitforge/search.hpp"
#include "hitforge/types.hpp"
#include "hitforge/version.hpp"

namespace fs = std::filesystem;
using namespace hitforge;

namespace {

struct YearRange {
  int min_year = 0;
  int max_year = 0;
};

YearRange parse_years(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DomainError("--years expects MIN:MAX, got '" + text + "'");
  }
  YearRange r;
  r.min_year = std::stoi(text.substr(0, colon));
  r.max_year = std::stoi(text.substr(colon + 1));
  if (r.min_year > r.max_year) throw DomainError("--years range is reversed");
  return r;
}

corpus::SplitFractions parse_fractions(const std::string& text) {
  double w[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = text.find(':', pos);
    const bool last = i == 2;
    if ((colon == std::string::npos) != last) {
      throw DomainError("--fractions expects TRAIN:VAL:TEST weights");
    }
    w[i] = std::stod(text.substr(pos, last ? std::string::npos : colon - pos));
    if (!(w[i] > 0)) throw DomainError("split weights must be positive");
    pos = colon + 1;
  }
  const double sum = w[0] + w[1] + w[2];
  return {w[0] / sum, w[1] / sum, w[2] / sum};
}

RunManifest begin_manifest(const std::string& command, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.seed = seed;
  m.tool_version = kVersion;
  m.started_at = utc_now_iso8601();
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& out_dir) {
  m.finished_at = utc_now_iso8601();
  m.write(out_dir / ("manifest_" + m.command + ".json"));
}

struct IngestArgs {
  std::string fixtures;
  std::string base_url;
  std::string token;
  std::string years;
  int rate_limit = 10;
  std::string out;
};

int run_ingest(const IngestArgs& args) {
  const YearRange years = parse_years(args.years);
  ingest::TransportConfig tc;
  if (!args.fixtures.empty()) {
    tc.mode = ingest::TransportConfig::Mode::fixture;
    tc.fixture_root = fs::path(args.fixtures);
  } else {
    tc.mode = ingest::TransportConfig::Mode::live;
    tc.credentials = args.token;
    if (!args.base_url.empty()) tc.base_url = args.base_url;
  }
  tc.rate_limit = args.rate_limit;
  auto transport = ingest::make_transport(tc);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("ingest", 0);
  manifest.flags = {{"years", args.years},
                    {"fixtures", args.fixtures},
                    {"out", args.out}};

  std::vector<ingest::JoinedTrack> joined;
  std::size_t missing = 0;
  for (int year = years.min_year; year <= years.max_year; ++year) {
    auto tracks = ingest::fetch_tracks_by_year(*transport, year);
    if (tracks.empty()) continue;
    std::vector<std::string> ids;
    ids.reserve(tracks.size());
    for (const auto& t : tracks) ids.push_back(t.track_id);
    auto features = ingest::fetch_audio_features(*transport, ids);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (!features[i]) ++missing;
      joined.push_back({std::move(tracks[i]), std::move(features[i])});
    }
  }

  std::vector<ChartEntry> charts;
  for (const Date& week :
       ingest::chart_saturdays(years.min_year, years.max_year)) {
    auto entries = ingest::fetch_chart_week(*transport, week);
    charts.insert(charts.end(), entries.begin(), entries.end());
  }

  ingest::write_spotify_jsonl(out_dir / "spotify.jsonl", joined);
  ingest::write_charts_jsonl(out_dir / "charts.jsonl", charts);
  manifest.add_output(out_dir / "spotify.jsonl");
  manifest.add_output(out_dir / "charts.jsonl");
  finish_manifest(manifest, out_dir);
  std::cerr << "ingested " << joined.size() << " tracks (" << missing
            << " without audio features), " << charts.size()
            << " chart rows\n";
  return 0;
}

struct BuildCorpusArgs {
  std::string spotify;
  std::string charts;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t n_per_class = 0;  // 0 = the smaller class count
  int min_year = kMinChartYear;
  int max_year = kMaxChartYear;
  std::size_t min_count_per_year = 0;
};

int run_build_corpus(const BuildCorpusArgs& args) {
  const auto spotify = ingest::read_spotify_jsonl(args.spotify);
  const auto charts = ingest::read_charts_jsonl(args.charts);

  corpus::MergeResult merged = corpus::merge(spotify, charts);
  const auto filtered =
      corpus::filter_years(merged.tracks, args.min_year, args.max_year,
                           args.min_count_per_year);
  std::size_t hits = 0;
  for (const auto& t : filtered) hits += t.billboard_hit == 1;
  const std::size_t non_hits = filtered.size() - hits;
  const std::size_t n_per_class =
      args.n_per_class > 0 ? args.n_per_class : std::min(hits, non_hits);
  const auto balanced = corpus::balance_sample(filtered, n_per_class, args.seed);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("build-corpus", args.seed);
  manifest.flags = {{"spotify", args.spotify},
                    {"charts", args.charts},
                    {"n_per_class", std::to_string(n_per_class)},
                    {"out", args.out}};
  manifest.add_input(args.spotify);
  manifest.add_input(args.charts);

  corpus::write_corpus_csv(out_dir / "corpus.csv", balanced);
  corpus::write_corpus_jsonl(out_dir / "corpus.jsonl", balanced);
  {
    std::ofstream report(out_dir / "merge_report.json", std::ios::binary);
    report << merged.report.to_json().dump(2) << '\n';
  }
  manifest.add_output(out_dir / "corpus.csv");
  manifest.add_output(out_dir / "corpus.jsonl");
  manifest.add_output(out_dir / "merge_report.json");
  finish_manifest(manifest, out_dir);
  std::cerr << "corpus: " << balanced.size() << " tracks (" << n_per_class
            << " per class) from " << merged.tracks.size() << " merged\n";
  return 0;
}

struct SplitArgs {
  std::string corpus;
  std::string fractions = "20:2:2";
  std::uint64_t seed = 0;
  std::string out;
};

int run_split(const SplitArgs& args) {
  const auto tracks = corpus::read_corpus_csv(args.corpus);
  const auto fractions = parse_fractions(args.fractions);
  const auto split = corpus::make_splits(tracks, fractions, args.seed);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("split", args.seed);
  manifest.flags = {{"corpus", args.corpus},
                    {"fractions", args.fractions},
                    {"out", args.out}};
  manifest.add_input(args.corpus);
  corpus::write_corpus_csv(out_dir / "train.csv", split.train);
  corpus::write_corpus_csv(out_dir / "val.csv", split.validation);
  corpus::write_corpus_csv(out_dir / "test.csv", split.test);
  manifest.add_output(out_dir / "train.csv");
  manifest.add_output(out_dir / "val.csv");
  manifest.add_output(out_dir / "test.csv");
  finish_manifest(manifest, out_dir);
  std::cerr << "split sizes: " << split.train.size() << "/"
            << split.validation.size() << "/" << split.test.size() << '\n';
  return 0;
}

struct TrainArgs {
  std::string model;
  std::string data;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 0;
  // Paper defaults, overridable per flag.
  models::ModelConfig config;
  bool no_bootstrap = false;
};

int run_train(const TrainArgs& args) {
  const auto kind = models::model_kind_from_string(args.model);
  models::ModelConfig config = args.config;
  config.seed = args.seed;
  config.forest.bootstrap = !args.no_bootstrap;
  config.validate();

  const auto train_tracks =
      corpus::read_corpus_csv(fs::path(args.data) / "train.csv");
  const auto schema = feat::FeatureSchema::defaults();
  const auto scaler = feat::fit_scaler(train_tracks, schema);
  const auto matrix = feat::build_matrix(train_tracks, schema, scaler);

  const auto model = models::train(kind, matrix, config, args.workers);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("train", args.seed);
  manifest.flags = {{"model", args.model},
                    {"data", args.data},
                    {"workers", std::to_string(args.workers)},
                    {"out", args.out}};
  manifest.add_input(fs::path(args.data) / "train.csv");
  const fs::path model_path = out_dir / ("model_" + args.model + ".json");
  models::save_model(model_path, model, schema, scaler, config);
  manifest.add_output(model_path);
  finish_manifest(manifest, out_dir);
  std::cerr << "trained " << args.model << " on " << matrix.rows << " rows -> "
            << model_path.string() << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string split = "val";
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  if (args.split != "train" && args.split != "val" && args.split != "test") {
    throw DomainError("--split must be train, val or test");
  }
  const auto loaded = models::load_model(args.model);
  const auto tracks =
      corpus::read_corpus_csv(fs::path(args.data) / (args.split + ".csv"));
  const auto matrix = feat::build_matrix(tracks, loaded.schema, loaded.scaler);

  std::vector<int> predicted(matrix.rows);
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    predicted[r] = models::predict(loaded.model, matrix.row(r),
                                   loaded.config.threshold)
                       .label;
  }
  eval::MetricsReport report;
  report.model = models::to_string(models::kind_of(loaded.model));
  report.split = args.split;
  report.cm = eval::confusion(predicted, matrix.labels);
  report.m = eval::metrics(report.cm);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("evaluate", loaded.config.seed);
  manifest.flags = {{"model", args.model},
                    {"data", args.data},
                    {"split", args.split},
                    {"out", args.out}};
  manifest.add_input(args.model);
  const fs::path metrics_path =
      out_dir / ("metrics_" + report.model + "_" + report.split + ".json");
  {
    std::ofstream out(metrics_path, std::ios::binary);
    out << report.to_json().dump(2) << '\n';
  }
  eval::emit_report({report}, out_dir);
  manifest.add_output(metrics_path);
  manifest.add_output(out_dir / "table1.csv");
  finish_manifest(manifest, out_dir);
  std::cerr << report.model << " " << report.split
            << ": accuracy=" << eval::format_metric(report.m.accuracy)
            << " precision=" << eval::format_metric(report.m.precision)
            << " recall=" << eval::format_metric(report.m.recall) << '\n';
  return 0;
}

struct SearchArgs {
  std::string sweep;
  std::string data;
  std::string mode = "random";
  std::string out;
  int workers = 0;
  std::int64_t seed_override = -1;
};

int run_search(const SearchArgs& args) {
  search::SweepSpec spec = search::SweepSpec::load(args.sweep);
  if (args.seed_override >= 0) {
    spec.master_seed = static_cast<std::uint64_t>(args.seed_override);
  }

  corpus::CorpusSplit split;
  split.train = corpus::read_corpus_csv(fs::path(args.data) / "train.csv");
  split.validation = corpus::read_corpus_csv(fs::path(args.data) / "val.csv");

  std::vector<search::Trial> ranked;
  if (args.mode == "random") {
    ranked = search::random_search(spec, split, args.workers);
  } else if (args.mode == "grid") {
    ranked = search::grid_search(spec, split, args.workers);
  } else {
    throw DomainError("--mode must be random or grid");
  }

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("search", spec.master_seed);
  manifest.flags = {{"sweep", args.sweep},
                    {"data", args.data},
                    {"mode", args.mode},
                    {"workers", std::to_string(args.workers)},
                    {"out", args.out}};
  manifest.add_input(args.sweep);
  search::write_trials_csv(out_dir / "trials.csv", ranked);
  manifest.add_output(out_dir / "trials.csv");
  if (!ranked.empty() && ranked.front().ok()) {
    search::write_best_config(out_dir / "best_config.json", spec,
                              ranked.front());
    manifest.add_output(out_dir / "best_config.json");
  }
  finish_manifest(manifest, out_dir);
  std::cerr << "search: " << ranked.size() << " trials";
  if (!ranked.empty() && ranked.front().ok()) {
    std::cerr << ", best accuracy "
              << eval::format_metric(ranked.front().report->m.accuracy);
  }
  std::cerr << '\n';
  return 0;
}

struct ReportArgs {
  std::vector<std::string> metrics;
  std::string out;
};

int run_report(const ReportArgs& args) {
  std::vector<eval::MetricsReport> reports;
  for (const auto& path : args.metrics) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open metrics file " + path);
    nlohmann::json doc;
    in >> doc;
    reports.push_back(eval::MetricsReport::from_json(doc));
  }
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  RunManifest manifest = begin_manifest("report", 0);
  manifest.flags = {{"out", args.out}};
  for (const auto& path : args.metrics) manifest.add_input(path);
  eval::emit_report(reports, out_dir);
  manifest.add_output(out_dir / "table1.csv");
  manifest.add_output(out_dir / "accuracy_bars.tsv");
  manifest.add_output(out_dir / "accuracy_bars.svg");
  finish_manifest(manifest, out_dir);
  std::cerr << "report written for " << reports.size() << " metric sets\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hit Song Science pipeline", "hitforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  IngestArgs ingest_args;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Pull tracks, audio features and charts");
  ingest_cmd->add_option("--fixtures", ingest_args.fixtures,
                         "Fixture directory (offline mode)")
      ->envname("HITFORGE_FIXTURES");
  ingest_cmd->add_option("--base-url", ingest_args.base_url, "Live API base URL");
  ingest_cmd->add_option("--token", ingest_args.token, "Live bearer token");
  ingest_cmd->add_option("--years", ingest_args.years, "Release years MIN:MAX")
      ->required();
  ingest_cmd->add_option("--rate-limit", ingest_args.rate_limit,
                         "Live requests per second");
  ingest_cmd->add_option("--out", ingest_args.out, "Output directory")
      ->required();

  BuildCorpusArgs corpus_args;
  auto* corpus_cmd = app.add_subcommand(
      "build-corpus", "Merge, label, mine and balance the corpus");
  corpus_cmd->add_option("--spotify", corpus_args.spotify, "spotify.jsonl")
      ->required();
  corpus_cmd->add_option("--charts", corpus_args.charts, "charts.jsonl")
      ->required();
  corpus_cmd->add_option("--seed", corpus_args.seed, "Sampling seed")
      ->required();
  corpus_cmd->add_option("--out", corpus_args.out, "Output directory")
      ->required();
  corpus_cmd->add_option("--n-per-class", corpus_args.n_per_class,
                         "Tracks per class (default: smaller class count)");
  corpus_cmd->add_option("--min-year", corpus_args.min_year, "Year filter lower bound");
  corpus_cmd->add_option("--max-year", corpus_args.max_year, "Year filter upper bound");
  corpus_cmd->add_option("--min-count-per-year", corpus_args.min_count_per_year,
                         "Drop years with fewer tracks than this");

  SplitArgs split_args;
  auto* split_cmd =
      app.add_subcommand("split", "Stratified train/validation/test split");
  split_cmd->add_option("--corpus", split_args.corpus, "corpus.csv")->required();
  split_cmd->add_option("--fractions", split_args.fractions,
                        "Weights TRAIN:VAL:TEST (default 20:2:2)");
  split_cmd->add_option("--seed", split_args.seed, "Shuffle seed")->required();
  split_cmd->add_option("--out", split_args.out, "Output directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Fit one model on train.csv");
  train_cmd->add_option("--model", train_args.model, "lr|nn|rf|svm")->required();
  train_cmd->add_option("--data", train_args.data, "Split directory")->required();
  train_cmd->add_option("--seed", train_args.seed, "Training seed")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--workers", train_args.workers,
                        "Forest training threads (default: all cores)");
  train_cmd->add_option("--threshold", train_args.config.threshold,
                        "Decision threshold");
  train_cmd->add_option("--lr-epochs", train_args.config.lr.epochs, "LR epochs");
  train_cmd->add_option("--lr-learning-rate",
                        train_args.config.lr.learning_rate, "LR learning rate");
  train_cmd->add_option("--nn-epochs", train_args.config.mlp.epochs, "MLP epochs");
  train_cmd->add_option("--nn-learning-rate",
                        train_args.config.mlp.learning_rate, "MLP learning rate");
  train_cmd->add_option("--nn-hidden-units", train_args.config.mlp.hidden_units,
                        "MLP hidden units");
  train_cmd->add_option("--nn-batch-size", train_args.config.mlp.batch_size,
                        "MLP batch size");
  train_cmd->add_option("--rf-estimators", train_args.config.forest.n_estimators,
                        "Forest size");
  train_cmd->add_option("--rf-max-features",
                        train_args.config.forest.max_features,
                        "Features considered per node");
  train_cmd->add_option("--rf-min-samples-split",
                        train_args.config.forest.min_samples_split,
                        "Minimum rows to split a node");
  train_cmd->add_flag("--rf-no-bootstrap", train_args.no_bootstrap,
                      "Fit each tree on the full training set");
  train_cmd->add_option("--svm-gamma", train_args.config.svm.gamma, "RBF gamma");
  train_cmd->add_option("--svm-c", train_args.config.svm.c, "Soft-margin C");

  EvaluateArgs eval_args;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Score a trained model on one split");
  eval_cmd->add_option("--model", eval_args.model, "model JSON file")->required();
  eval_cmd->add_option("--data", eval_args.data, "Split directory")->required();
  eval_cmd->add_option("--split", eval_args.split, "train|val|test");
  eval_cmd->add_option("--out", eval_args.out, "Output directory")->required();

  SearchArgs search_args;
  auto* search_cmd =
      app.add_subcommand("search", "Randomized or grid hyperparameter sweep");
  search_cmd->add_option("--sweep", search_args.sweep, "Sweep spec JSON")
      ->required();
  search_cmd->add_option("--data", search_args.data, "Split directory")
      ->required();
  search_cmd->add_option("--mode", search_args.mode, "random|grid");
  search_cmd->add_option("--out", search_args.out, "Output directory")
      ->required();
  search_cmd->add_option("--workers", search_args.workers,
                         "Parallel trials (default: all cores)");
  search_cmd->add_option("--seed", search_args.seed_override,
                         "Override the sweep file's master seed");

  ReportArgs report_args;
  auto* report_cmd =
      app.add_subcommand("report", "Combine metric files into report tables");
  report_cmd->add_option("--metrics", report_args.metrics,
                         "metrics_*.json files (repeatable)")
      ->required();
  report_cmd->add_option("--out", report_args.out, "Output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help / --version
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest_args);
    if (*corpus_cmd) return run_build_corpus(corpus_args);
    if (*split_cmd) return run_split(split_args);
    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_evaluate(eval_args);
    if (*search_cmd) return run_search(search_args);
    if (*report_cmd) return run_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
