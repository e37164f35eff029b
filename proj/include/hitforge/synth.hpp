#pragma once

#include <cstdint>
#include <filesystem>

namespace hitforge::synth {

// Deterministic fixture corpus: Spotify-shaped track pages and per-id audio
// feature documents plus weekly 100-row charts, with class-conditional
// feature distributions so the trained models have real signal to find.
struct SynthConfig {
  std::uint64_t seed = 42;
  int min_year = 2014;
  int max_year = 2017;
  int hit_tracks = 1350;      // distinct songs that will chart
  int non_hit_tracks = 1400;
  int filler_songs = 120;     // chart-only keys with no Spotify record
  int page_size = 500;        // tracks per fixture page
  double missing_feature_rate = 0.01;
  int duplicate_records = 12;  // extra Spotify records sharing a match key
};

struct SynthStats {
  int spotify_records = 0;
  int hit_tracks = 0;
  int chart_weeks = 0;
  int chart_rows = 0;
  int missing_feature_records = 0;
};

SynthStats generate_fixtures(const SynthConfig& config,
                             const std::filesystem::path& out_root);

}  // namespace hitforge::synth
