#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "hitforge/features.hpp"
#include "hitforge/models.hpp"
#include "hitforge/rng.hpp"
#include "hitforge/search.hpp"

// Wall-time comparison of the serial reference paths against the OpenMP
// kernels: forest training, the SVM kernel-matrix precompute and parallel
// search trials, all on synthetic data.

using namespace hitforge;

namespace {

feat::FeatureMatrix synthetic_matrix(std::size_t rows, std::size_t cols,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data(rows * cols);
  std::vector<int> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = static_cast<int>(r % 2);
    labels[r] = y;
    const double shift = y == 1 ? 0.8 : -0.8;
    for (std::size_t c = 0; c < cols; ++c) {
      data[r * cols + c] = rng.normal(c < 6 ? shift : 0.0, 1.0);
    }
  }
  return feat::FeatureMatrix::from_raw(rows, cols, std::move(data),
                                       std::move(labels));
}

Track synthetic_track(Rng& rng, int hit, int index) {
  Track t;
  t.info.track_id = "bench" + std::to_string(index);
  t.info.track_title = "Track " + std::to_string(index);
  t.info.artist_title = "Artist " + std::to_string(index % 40);
  t.info.artist_id = "ar" + std::to_string(index % 40);
  t.info.album_id = "al" + std::to_string(index);
  t.info.popularity = 50;
  t.info.duration_ms = 200000 + static_cast<long long>(rng.bounded(60000));
  t.info.album_release_date = Date{2015, 6, 1};
  const double shift = hit ? 0.25 : -0.25;
  t.audio.acousticness = std::clamp(0.5 + shift + rng.normal() * 0.1, 0.0, 1.0);
  t.audio.danceability = std::clamp(0.5 + shift + rng.normal() * 0.1, 0.0, 1.0);
  t.audio.energy = std::clamp(0.5 + shift + rng.normal() * 0.1, 0.0, 1.0);
  t.audio.instrumentalness = std::clamp(0.3 + rng.normal() * 0.1, 0.0, 1.0);
  t.audio.liveness = std::clamp(0.2 + rng.normal() * 0.05, 0.0, 1.0);
  t.audio.speechiness = std::clamp(0.1 + rng.normal() * 0.03, 0.0, 1.0);
  t.audio.valence = std::clamp(0.5 + shift + rng.normal() * 0.1, 0.0, 1.0);
  t.audio.key = static_cast<int>(rng.bounded(12));
  t.audio.loudness = -8.0 + rng.normal() * 2.0;
  t.audio.mode = static_cast<int>(rng.bounded(2));
  t.audio.tempo = 118.0 + rng.normal() * 10.0;
  t.audio.time_signature = 4;
  if (hit) {
    t.billboard_hit = 1;
    t.weeks = 3;
    t.rank = 10;
    t.score = 0.2;
  }
  return t;
}

template <typename F>
double time_ms(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial-vs-OpenMP benchmark", "hitforge-bench"};
  std::size_t rows = 4000;
  std::size_t cols = 15;
  int trees = 80;
  app.add_option("--rows", rows, "Synthetic training rows");
  app.add_option("--cols", cols, "Feature columns");
  app.add_option("--trees", trees, "Forest size");
  CLI11_PARSE(app, argc, argv);

  const auto matrix = synthetic_matrix(rows, cols, 7);
  const int max_threads = omp_get_max_threads();
  std::printf("rows=%zu cols=%zu trees=%d threads=%d\n", rows, cols, trees,
              max_threads);

  models::ModelConfig config;
  config.seed = 7;
  config.forest.n_estimators = trees;

  const double t_serial =
      time_ms([&] { (void)models::train_forest_serial(matrix, config); });
  std::printf("%-30s %10.1f ms\n", "forest serial", t_serial);
  for (const int workers : {2, max_threads}) {
    const double t =
        time_ms([&] { (void)models::train_forest(matrix, config, workers); });
    std::printf("forest omp x%-3d                %10.1f ms  (speedup %.2fx)\n",
                workers, t, t_serial / t);
  }

  {
    models::ModelConfig svm_config;
    svm_config.seed = 7;
    const std::size_t n = std::min<std::size_t>(rows, 1200);
    const auto small = synthetic_matrix(n, cols, 9);
    const double t = time_ms([&] { (void)models::train_svm(small, svm_config); });
    std::printf("%-30s %10.1f ms  (n=%zu)\n", "svm smo + omp kernel", t, n);
  }

  {
    Rng rng(11);
    corpus::CorpusSplit split;
    for (int i = 0; i < 600; ++i) {
      split.train.push_back(synthetic_track(rng, i % 2, i));
    }
    for (int i = 600; i < 800; ++i) {
      split.validation.push_back(synthetic_track(rng, i % 2, i));
    }
    search::SweepSpec spec;
    spec.model = models::ModelKind::rf;
    spec.master_seed = 7;
    search::ParamDomain d;
    d.name = "n_estimators";
    d.kind = search::ParamDomain::Kind::choices;
    for (int v : {10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120}) {
      d.choices.push_back(nlohmann::json(v));
    }
    spec.domains.push_back(d);

    const double t1 =
        time_ms([&] { (void)search::grid_search(spec, split, 1); });
    std::printf("%-30s %10.1f ms\n", "search grid x1", t1);
    for (const int workers : {2, max_threads}) {
      const double t =
          time_ms([&] { (void)search::grid_search(spec, split, workers); });
      std::printf("search grid x%-3d               %10.1f ms  (speedup %.2fx)\n",
                  workers, t, t1 / t);
    }
  }
  return 0;
}
