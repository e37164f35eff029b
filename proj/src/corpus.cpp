#include "hitforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "hitforge/csv.hpp"
#include "hitforge/rng.hpp"

namespace hitforge::corpus {

using nlohmann::json;

namespace {

// Drops (...) and [...] segments, including nested ones.
std::string strip_bracketed(const std::string& s) {
  std::string out;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '[') {
      ++depth;
    } else if (c == ')' || c == ']') {
      if (depth > 0) --depth;
    } else if (depth == 0) {
      out.push_back(c);
    }
  }
  return out;
}

bool is_feat_marker(const std::string& token) {
  return token == "feat" || token == "ft" || token == "featuring";
}

std::string normalize_component(const std::string& raw) {
  std::string text = strip_bracketed(raw);
  for (char& c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      c = static_cast<char>(std::tolower(u));
    } else {
      c = ' ';
    }
  }
  std::string out;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return true;
    if (is_feat_marker(token)) return false;  // truncate at featured artists
    if (!out.empty()) out.push_back(' ');
    out += token;
    token.clear();
    return true;
  };
  for (char c : text) {
    if (c == ' ') {
      if (!flush()) return out;
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace

MatchKey normalize_match_key(const std::string& title,
                             const std::string& artist) {
  return MatchKey{normalize_component(title), normalize_component(artist)};
}

ChartIndex::ChartIndex(const std::vector<ChartEntry>& entries) {
  for (const auto& e : entries) {
    by_key_[normalize_match_key(e.track_title, e.artist_title)].push_back(
        ChartAppearance{e.chart_date, e.rank});
  }
  for (auto& [key, appearances] : by_key_) {
    std::sort(appearances.begin(), appearances.end(),
              [](const ChartAppearance& a, const ChartAppearance& b) {
                return a.date < b.date || (a.date == b.date && a.rank < b.rank);
              });
    by_artist_[key.artist].emplace_back(key, appearances.front().date);
  }
}

std::optional<Date> ChartIndex::first_chart_date(const MatchKey& key) const {
  const auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second.front().date;
}

const std::vector<std::pair<MatchKey, Date>>& ChartIndex::keys_for_artist(
    const std::string& normalized_artist) const {
  static const std::vector<std::pair<MatchKey, Date>> kEmpty;
  const auto it = by_artist_.find(normalized_artist);
  return it == by_artist_.end() ? kEmpty : it->second;
}

double raw_score(const std::vector<ChartAppearance>& appearances) {
  double raw = 0.0;
  for (const auto& a : appearances) {
    if (a.rank < 1 || a.rank > 100) {
      throw DomainError("chart rank " + std::to_string(a.rank) +
                        " outside [1,100]");
    }
    raw += (101.0 - a.rank) / 100.0;
  }
  return raw;
}

double compute_score(const std::vector<ChartAppearance>& appearances,
                     double corpus_max_raw) {
  if (appearances.empty()) return 0.0;
  if (!(corpus_max_raw > 0.0)) {
    throw DomainError("corpus_max_raw must be positive for charted tracks");
  }
  const double s = raw_score(appearances) / corpus_max_raw;
  return std::clamp(s, 0.0, 1.0);
}

json MergeReport::to_json() const {
  json doc;
  doc["spotify_records"] = spotify_records;
  doc["missing_audio_dropped"] = missing_audio_dropped;
  doc["duplicate_keys_dropped"] = duplicate_keys_dropped;
  doc["chart_keys_total"] = chart_keys_total;
  doc["chart_keys_unmatched"] = chart_keys_unmatched;
  doc["hits"] = hits;
  doc["non_hits"] = non_hits;
  return doc;
}

MergeResult merge(const std::vector<ingest::JoinedTrack>& spotify,
                  const std::vector<ChartEntry>& chart) {
  MergeResult result;
  MergeReport& report = result.report;
  report.spotify_records = spotify.size();

  // Dedupe by match key, keeping the most popular record (ties keep the
  // lexicographically smallest track_id).
  std::map<MatchKey, const ingest::JoinedTrack*> winners;
  for (const auto& t : spotify) {
    if (!t.audio) {
      ++report.missing_audio_dropped;
      continue;
    }
    const MatchKey key =
        normalize_match_key(t.info.track_title, t.info.artist_title);
    auto [it, inserted] = winners.emplace(key, &t);
    if (!inserted) {
      ++report.duplicate_keys_dropped;
      const ingest::JoinedTrack* cur = it->second;
      if (t.info.popularity > cur->info.popularity ||
          (t.info.popularity == cur->info.popularity &&
           t.info.track_id < cur->info.track_id)) {
        it->second = &t;
      }
    }
  }

  const ChartIndex index(chart);
  report.chart_keys_total = index.by_key().size();

  // Normalization constant: the largest raw score over the matched corpus.
  double corpus_max_raw = 0.0;
  std::set<MatchKey> matched;
  for (const auto& [key, record] : winners) {
    const auto it = index.by_key().find(key);
    if (it != index.by_key().end()) {
      matched.insert(key);
      corpus_max_raw = std::max(corpus_max_raw, raw_score(it->second));
    }
  }
  report.chart_keys_unmatched = report.chart_keys_total - matched.size();

  result.tracks.reserve(winners.size());
  for (const auto& [key, record] : winners) {
    Track track;
    track.info = record->info;
    track.audio = *record->audio;
    const auto it = index.by_key().find(key);
    if (it != index.by_key().end()) {
      const auto& appearances = it->second;
      track.weeks = static_cast<int>(appearances.size());
      track.rank = appearances.front().rank;
      for (const auto& a : appearances) track.rank = std::min(track.rank, a.rank);
      track.score = compute_score(appearances, corpus_max_raw);
      track.billboard_hit = 1;
      ++report.hits;
    } else {
      ++report.non_hits;
    }
    track.artist_past_hits = mine_artist_past_hits(track, index, {});
    track.validate_labels();
    result.tracks.push_back(std::move(track));
  }

  std::sort(result.tracks.begin(), result.tracks.end(),
            [](const Track& a, const Track& b) {
              return a.info.track_id < b.info.track_id;
            });
  return result;
}

int mine_artist_past_hits(const Track& track, const ChartIndex& history,
                          const std::map<MatchKey, Date>& release_dates) {
  const MatchKey own =
      normalize_match_key(track.info.track_title, track.info.artist_title);
  Date release = track.info.album_release_date;
  if (const auto it = release_dates.find(own); it != release_dates.end()) {
    release = it->second;
  }
  if (release.year <= 0) {
    throw DomainError("track " + track.info.track_id +
                      " has no resolvable release date");
  }
  int count = 0;
  for (const auto& [key, first_date] : history.keys_for_artist(own.artist)) {
    if (key == own) continue;  // a track never feeds its own feature
    if (first_date < release) ++count;
  }
  return count;
}

std::vector<Track> filter_years(const std::vector<Track>& tracks, int min_year,
                                int max_year, std::size_t min_count_per_year) {
  if (min_year > max_year) {
    throw std::invalid_argument("filter_years: min_year > max_year");
  }
  std::unordered_map<int, std::size_t> per_year;
  for (const auto& t : tracks) {
    const int y = t.info.album_release_date.year;
    if (y >= min_year && y <= max_year) ++per_year[y];
  }
  std::vector<Track> out;
  for (const auto& t : tracks) {
    const int y = t.info.album_release_date.year;
    if (y >= min_year && y <= max_year && per_year[y] >= min_count_per_year) {
      out.push_back(t);
    }
  }
  return out;
}

namespace {

// Canonical order before any seeded draw: results depend on set membership,
// not on input order.
std::vector<const Track*> sorted_by_id(const std::vector<Track>& tracks,
                                       int label) {
  std::vector<const Track*> out;
  for (const auto& t : tracks) {
    if (t.billboard_hit == label) out.push_back(&t);
  }
  std::sort(out.begin(), out.end(), [](const Track* a, const Track* b) {
    return a->info.track_id < b->info.track_id;
  });
  return out;
}

}  // namespace

std::vector<Track> balance_sample(const std::vector<Track>& merged,
                                  std::size_t n_per_class, std::uint64_t seed) {
  std::vector<const Track*> hits = sorted_by_id(merged, 1);
  std::vector<const Track*> non_hits = sorted_by_id(merged, 0);
  if (hits.size() < n_per_class || non_hits.size() < n_per_class) {
    throw DomainError("balance_sample: need " + std::to_string(n_per_class) +
                      " per class, have " + std::to_string(hits.size()) +
                      " hits / " + std::to_string(non_hits.size()) +
                      " non-hits");
  }
  Rng hit_rng(derive_seed(seed, 0xB41A, 1));
  Rng non_rng(derive_seed(seed, 0xB41A, 0));
  hit_rng.shuffle(hits);
  non_rng.shuffle(non_hits);
  std::vector<Track> out;
  out.reserve(2 * n_per_class);
  for (std::size_t i = 0; i < n_per_class; ++i) out.push_back(*hits[i]);
  for (std::size_t i = 0; i < n_per_class; ++i) out.push_back(*non_hits[i]);
  return out;
}

CorpusSplit make_splits(const std::vector<Track>& balanced,
                        const SplitFractions& fractions, std::uint64_t seed) {
  const double sum = fractions.train + fractions.validation + fractions.test;
  if (!(fractions.train > 0 && fractions.validation > 0 && fractions.test > 0)) {
    throw std::invalid_argument("split fractions must all be positive");
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }

  CorpusSplit split;
  split.seed = seed;
  const double f[3] = {fractions.train, fractions.validation, fractions.test};
  std::vector<Track>* dest[3] = {&split.train, &split.validation, &split.test};

  for (int label : {1, 0}) {
    std::vector<const Track*> members = sorted_by_id(balanced, label);
    Rng rng(derive_seed(seed, 0x59717, static_cast<std::uint64_t>(label)));
    rng.shuffle(members);

    const std::size_t n = members.size();
    std::size_t counts[3];
    double remainders[3];
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      const double exact = f[s] * static_cast<double>(n);
      counts[s] = static_cast<std::size_t>(std::floor(exact));
      remainders[s] = exact - std::floor(exact);
      assigned += counts[s];
    }
    // Largest-remainder rounding; ties favor train, then validation.
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3,
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (std::size_t extra = 0; extra < n - assigned; ++extra) {
      ++counts[order[extra % 3]];
    }
    for (int s = 0; s < 3; ++s) {
      if (counts[s] == 0) {
        throw DomainError("make_splits: class " + std::to_string(label) +
                          " cannot populate every split");
      }
    }
    std::size_t cursor = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < counts[s]; ++i) {
        dest[s]->push_back(*members[cursor++]);
      }
    }
  }
  return split;
}

const std::array<const char*, 28> kCorpusColumns = {
    "track_id",      "track_title",   "artist_title",
    "artist_id",     "popularity",    "explicit",
    "duration_ms",   "preview_url",   "album_id",
    "album_type",    "album_release_date", "acousticness",
    "danceability",  "energy",        "instrumentalness",
    "key",           "liveness",      "loudness",
    "mode",          "speechiness",   "tempo",
    "time_signature", "valence",      "weeks",
    "rank",          "score",         "billboard_hit",
    "artist_past_hits"};

void write_corpus_csv(const std::filesystem::path& path,
                      const std::vector<Track>& tracks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < kCorpusColumns.size(); ++i) {
    out << (i ? "," : "") << kCorpusColumns[i];
  }
  out << '\n';
  using csvio::escape;
  using csvio::format_fixed;
  for (const auto& t : tracks) {
    out << escape(t.info.track_id) << ',' << escape(t.info.track_title) << ','
        << escape(t.info.artist_title) << ',' << escape(t.info.artist_id) << ','
        << t.info.popularity << ',' << t.info.explicit_flag << ','
        << t.info.duration_ms << ','
        << escape(t.info.preview_url.value_or("")) << ','
        << escape(t.info.album_id) << ',' << to_string(t.info.album_type) << ','
        << t.info.album_release_date.iso() << ','
        << format_fixed(t.audio.acousticness, 6) << ','
        << format_fixed(t.audio.danceability, 6) << ','
        << format_fixed(t.audio.energy, 6) << ','
        << format_fixed(t.audio.instrumentalness, 6) << ',' << t.audio.key
        << ',' << format_fixed(t.audio.liveness, 6) << ','
        << format_fixed(t.audio.loudness, 6) << ',' << t.audio.mode << ','
        << format_fixed(t.audio.speechiness, 6) << ','
        << format_fixed(t.audio.tempo, 6) << ',' << t.audio.time_signature
        << ',' << format_fixed(t.audio.valence, 6) << ',' << t.weeks << ','
        << t.rank << ',' << format_fixed(t.score, 6) << ',' << t.billboard_hit
        << ',' << t.artist_past_hits << '\n';
  }
}

std::vector<Track> read_corpus_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw DomainError("empty corpus CSV " + path.string());
  }
  const auto header = csvio::split_record(line);
  if (header.size() != kCorpusColumns.size()) {
    throw DomainError("corpus CSV " + path.string() + " has " +
                      std::to_string(header.size()) + " columns, expected 28");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kCorpusColumns[i]) {
      throw DomainError("corpus CSV column " + std::to_string(i) + " is '" +
                        header[i] + "', expected '" + kCorpusColumns[i] + "'");
    }
  }
  std::vector<Track> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csvio::split_record(line);
    if (f.size() != kCorpusColumns.size()) {
      throw DomainError("corpus CSV row with " + std::to_string(f.size()) +
                        " fields");
    }
    Track t;
    t.info.track_id = f[0];
    t.info.track_title = f[1];
    t.info.artist_title = f[2];
    t.info.artist_id = f[3];
    t.info.popularity = std::stoi(f[4]);
    t.info.explicit_flag = std::stoi(f[5]);
    t.info.duration_ms = std::stoll(f[6]);
    if (!f[7].empty()) t.info.preview_url = f[7];
    t.info.album_id = f[8];
    t.info.album_type = album_type_from_string(f[9]);
    t.info.album_release_date = Date::parse(f[10]);
    t.audio.track_id = t.info.track_id;
    t.audio.acousticness = std::stod(f[11]);
    t.audio.danceability = std::stod(f[12]);
    t.audio.energy = std::stod(f[13]);
    t.audio.instrumentalness = std::stod(f[14]);
    t.audio.key = std::stoi(f[15]);
    t.audio.liveness = std::stod(f[16]);
    t.audio.loudness = std::stod(f[17]);
    t.audio.mode = std::stoi(f[18]);
    t.audio.speechiness = std::stod(f[19]);
    t.audio.tempo = std::stod(f[20]);
    t.audio.time_signature = std::stoi(f[21]);
    t.audio.valence = std::stod(f[22]);
    t.weeks = std::stoi(f[23]);
    t.rank = std::stoi(f[24]);
    t.score = std::stod(f[25]);
    t.billboard_hit = std::stoi(f[26]);
    t.artist_past_hits = std::stoi(f[27]);
    t.validate_labels();
    out.push_back(std::move(t));
  }
  return out;
}

void write_corpus_jsonl(const std::filesystem::path& path,
                        const std::vector<Track>& tracks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  for (const auto& t : tracks) {
    json doc;
    doc["track_id"] = t.info.track_id;
    doc["track_title"] = t.info.track_title;
    doc["artist_title"] = t.info.artist_title;
    doc["artist_id"] = t.info.artist_id;
    doc["popularity"] = t.info.popularity;
    doc["explicit"] = t.info.explicit_flag;
    doc["duration_ms"] = t.info.duration_ms;
    doc["preview_url"] =
        t.info.preview_url ? json(*t.info.preview_url) : json(nullptr);
    doc["album_id"] = t.info.album_id;
    doc["album_type"] = to_string(t.info.album_type);
    doc["album_release_date"] = t.info.album_release_date.iso();
    doc["acousticness"] = t.audio.acousticness;
    doc["danceability"] = t.audio.danceability;
    doc["energy"] = t.audio.energy;
    doc["instrumentalness"] = t.audio.instrumentalness;
    doc["key"] = t.audio.key;
    doc["liveness"] = t.audio.liveness;
    doc["loudness"] = t.audio.loudness;
    doc["mode"] = t.audio.mode;
    doc["speechiness"] = t.audio.speechiness;
    doc["tempo"] = t.audio.tempo;
    doc["time_signature"] = t.audio.time_signature;
    doc["valence"] = t.audio.valence;
    doc["weeks"] = t.weeks;
    doc["rank"] = t.rank;
    doc["score"] = t.score;
    doc["billboard_hit"] = t.billboard_hit;
    doc["artist_past_hits"] = t.artist_past_hits;
    out << doc.dump() << '\n';
  }
}

}  // namespace hitforge::corpus
