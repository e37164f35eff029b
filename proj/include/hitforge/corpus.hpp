#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hitforge/ingest.hpp"
#include "hitforge/types.hpp"

namespace hitforge::corpus {

// Normalized (title, artist) join key: lowercase, punctuation stripped,
// whitespace collapsed, bracketed suffixes and "feat./ft./featuring ..."
// tails removed.
struct MatchKey {
  std::string title;
  std::string artist;

  friend auto operator<=>(const MatchKey&, const MatchKey&) = default;
};

MatchKey normalize_match_key(const std::string& title, const std::string& artist);

struct ChartAppearance {
  Date date;
  int rank = 0;
};

// Chart history folded per match key; appearances sorted by date.
class ChartIndex {
 public:
  ChartIndex() = default;
  explicit ChartIndex(const std::vector<ChartEntry>& entries);

  const std::map<MatchKey, std::vector<ChartAppearance>>& by_key() const {
    return by_key_;
  }
  std::optional<Date> first_chart_date(const MatchKey& key) const;

  // (key, first chart date) pairs for one normalized artist.
  const std::vector<std::pair<MatchKey, Date>>& keys_for_artist(
      const std::string& normalized_artist) const;

 private:
  std::map<MatchKey, std::vector<ChartAppearance>> by_key_;
  std::map<std::string, std::vector<std::pair<MatchKey, Date>>> by_artist_;
};

// Unnormalized weekly weight sum: Σ (101 - rank) / 100 over appearances.
double raw_score(const std::vector<ChartAppearance>& appearances);

// raw / corpus_max_raw, clipped to [0,1]. Zero for never-charted tracks.
double compute_score(const std::vector<ChartAppearance>& appearances,
                     double corpus_max_raw);

struct MergeReport {
  std::size_t spotify_records = 0;
  std::size_t missing_audio_dropped = 0;
  std::size_t duplicate_keys_dropped = 0;
  std::size_t chart_keys_total = 0;
  std::size_t chart_keys_unmatched = 0;
  std::size_t hits = 0;
  std::size_t non_hits = 0;

  nlohmann::json to_json() const;
};

struct MergeResult {
  std::vector<Track> tracks;  // sorted by track_id
  MergeReport report;
};

// Match-key join of the Spotify universe against chart history. Fills
// billboard_hit / weeks / rank / score and mines artist_past_hits. Tracks
// with missing audio features are dropped and counted; duplicate match keys
// keep the most popular record.
MergeResult merge(const std::vector<ingest::JoinedTrack>& spotify,
                  const std::vector<ChartEntry>& chart);

// Distinct charted keys by the same normalized artist whose first chart
// appearance falls strictly before this track's release date. The track's
// own key never counts. `release_dates` resolves the release date when the
// caller wants to override the record's own (tests); normally pass {}.
int mine_artist_past_hits(const Track& track, const ChartIndex& history,
                          const std::map<MatchKey, Date>& release_dates);

std::vector<Track> filter_years(const std::vector<Track>& tracks, int min_year,
                                int max_year, std::size_t min_count_per_year);

// Exactly n_per_class hits and n_per_class non-hits; order-insensitive in
// its input and deterministic given the seed.
std::vector<Track> balance_sample(const std::vector<Track>& merged,
                                  std::size_t n_per_class, std::uint64_t seed);

struct SplitFractions {
  double train = 0;
  double validation = 0;
  double test = 0;
};

struct CorpusSplit {
  std::vector<Track> train;
  std::vector<Track> validation;
  std::vector<Track> test;
  std::uint64_t seed = 0;
};

// Stratified by billboard_hit, disjoint by track_id, sizes within +-1 per
// class of the requested fractions.
CorpusSplit make_splits(const std::vector<Track>& balanced,
                        const SplitFractions& fractions, std::uint64_t seed);

// Interchange CSV: the 27 source columns in their documented order plus
// artist_past_hits. Floats carry 6 decimals, dates are ISO-8601.
extern const std::array<const char*, 28> kCorpusColumns;

void write_corpus_csv(const std::filesystem::path& path,
                      const std::vector<Track>& tracks);
std::vector<Track> read_corpus_csv(const std::filesystem::path& path);

void write_corpus_jsonl(const std::filesystem::path& path,
                        const std::vector<Track>& tracks);

}  // namespace hitforge::corpus
