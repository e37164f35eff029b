#include <iostream>

#include "CLI11.hpp"
#include "hitforge/synth.hpp"
#include "hitforge/version.hpp"

// Writes the bundled synthetic fixture corpus: Spotify-shaped track pages,
// per-id audio feature documents and weekly charts, all a pure function of
// the seed.
int main(int argc, char** argv) {
  CLI::App app{"Synthetic fixture corpus generator", "hitforge-synthgen"};
  app.set_version_flag("--version", hitforge::kVersion);

  hitforge::synth::SynthConfig config;
  std::string out;
  app.add_option("--out", out, "Fixture directory to create")->required();
  app.add_option("--seed", config.seed, "Generator seed (default 42)");
  app.add_option("--hits", config.hit_tracks, "Charting songs to create");
  app.add_option("--non-hits", config.non_hit_tracks, "Non-charting songs");
  app.add_option("--min-year", config.min_year, "First release year");
  app.add_option("--max-year", config.max_year, "Last release year");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    const auto stats = hitforge::synth::generate_fixtures(config, out);
    std::cerr << "fixtures: " << stats.spotify_records << " spotify records, "
              << stats.hit_tracks << " charted, " << stats.chart_weeks
              << " chart weeks, " << stats.missing_feature_records
              << " records without audio features\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
