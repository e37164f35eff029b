#include "hitforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "hitforge/ingest.hpp"
#include "hitforge/rng.hpp"
#include "hitforge/types.hpp"
#include "json.hpp"

namespace hitforge::synth {

using nlohmann::json;

namespace {

const char* kAdjectives[] = {
    "Midnight", "Golden",  "Electric", "Silent",  "Crimson", "Neon",
    "Velvet",   "Hollow",  "Wild",     "Frozen",  "Restless", "Paper",
    "Lunar",    "Shallow", "Burning",  "Gentle",  "Broken",  "Distant",
    "Sapphire", "Plastic", "Honest",   "Violet",  "Static",  "Weightless",
    "Amber",    "Feral",   "Quiet",    "Endless", "Scarlet", "Fleeting",
    "Wandering", "Brave",  "Nervous",  "Tidal",   "Primal",  "Glass",
    "Hidden",   "Rusty",   "Solar",    "Minor"};

const char* kNouns[] = {
    "River",   "Echo",    "Heart",   "Parade",  "Mirror", "Summer",
    "Diamond", "Motorway", "Garden", "Signal",  "Desire", "Thunder",
    "Harbor",  "Wire",    "Season",  "Shadow",  "Coast",  "Machine",
    "Promise", "Weekend", "Hurricane", "Window", "Motel", "Anthem",
    "Orbit",   "Letter",  "Ceiling", "Horizon", "Animal", "Lantern",
    "Avenue",  "Static",  "Currency", "Reason", "Ocean",  "Ghost",
    "Pattern", "Furnace", "Island",  "Arrow"};

const char* kFirstNames[] = {
    "Ava",    "Leo",   "Mara",  "Dexter", "Nina",  "Silas", "Ruby",
    "Otis",   "Clara", "Hugo",  "Ivy",    "Felix", "Nora",  "Jasper",
    "Tessa",  "Rocco", "Lena",  "Arlo",   "Daisy", "Ezra",  "Wren",
    "Marco",  "Sofia", "Dante", "Freya",  "Cole",  "Isla",  "Bruno",
    "Pearl",  "Knox",  "Vera",  "Sonny"};

const char* kLastNames[] = {
    "Vale",    "Marlowe", "Quinn",   "Hollis",  "Beckett", "Lane",
    "Mercer",  "Sloane",  "Ashford", "Calloway", "Reyes",  "North",
    "Winters", "Blake",   "Foster",  "Hart",    "Monroe",  "Ellison",
    "Drake",   "Campos",  "Irving",  "Soto",    "Whitaker", "Banks",
    "Farrow",  "Keats",   "Lowell",  "Moss",    "Pryor",   "Stone"};

std::string make_title(int k) {
  constexpr int a = static_cast<int>(std::size(kAdjectives));
  constexpr int n = static_cast<int>(std::size(kNouns));
  std::string title =
      std::string(kAdjectives[k % a]) + " " + kNouns[(k / a) % n];
  if (k >= a * n) title += " " + std::to_string(k / (a * n) + 1);
  return title;
}

std::string make_artist_name(int k) {
  constexpr int f = static_cast<int>(std::size(kFirstNames));
  constexpr int l = static_cast<int>(std::size(kLastNames));
  std::string name =
      std::string(kFirstNames[k % f]) + " " + kLastNames[(k / f) % l];
  if (k >= f * l) name += " " + std::to_string(k / (f * l) + 1);
  return name;
}

std::string hex_id(Rng& rng, const char* prefix) {
  static const char* kHex = "0123456789abcdef";
  std::string id = prefix;
  for (int i = 0; i < 16; ++i) id.push_back(kHex[rng.bounded(16)]);
  return id;
}

struct SynthArtist {
  std::string name;
  std::string id;
};

struct SynthSong {
  std::string track_id;
  std::string spotify_title;  // possibly decorated with a feat. suffix
  std::string clean_title;    // what the chart prints
  SynthArtist artist;
  std::string album_id;
  AlbumType album_type = AlbumType::album;
  Date release;
  bool hit = false;
  bool missing_features = false;
  int popularity = 0;
  int explicit_flag = 0;
  long long duration_ms = 0;
  double acousticness = 0, danceability = 0, energy = 0, instrumentalness = 0,
         liveness = 0, speechiness = 0, valence = 0, loudness = 0, tempo = 0;
  int key = 0, mode = 0, time_signature = 4;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void fill_features(SynthSong& s, Rng& rng) {
  if (s.hit) {
    s.danceability = clamp01(rng.normal(0.68, 0.10));
    s.energy = clamp01(rng.normal(0.72, 0.10));
    s.valence = clamp01(rng.normal(0.62, 0.13));
    s.acousticness = clamp01(rng.normal(0.22, 0.12));
    s.instrumentalness = clamp01(std::abs(rng.normal(0.0, 0.03)));
    s.liveness = clamp01(rng.normal(0.16, 0.07));
    s.speechiness = clamp01(rng.normal(0.07, 0.03));
    s.loudness = std::clamp(rng.normal(-5.5, 1.8), -60.0, 0.0);
    s.tempo = std::clamp(rng.normal(120.0, 14.0), 40.0, 230.0);
    s.mode = rng.uniform() < 0.72 ? 1 : 0;
    s.explicit_flag = rng.uniform() < 0.28 ? 1 : 0;
    s.duration_ms =
        std::max<long long>(45000, std::llround(rng.normal(215000.0, 22000.0)));
    s.popularity = static_cast<int>(std::clamp(rng.normal(62.0, 12.0), 0.0, 100.0));
    s.time_signature = rng.uniform() < 0.92 ? 4 : (rng.uniform() < 0.5 ? 3 : 5);
  } else {
    s.danceability = clamp01(rng.normal(0.50, 0.15));
    s.energy = clamp01(rng.normal(0.50, 0.16));
    s.valence = clamp01(rng.normal(0.44, 0.16));
    s.acousticness = clamp01(rng.normal(0.48, 0.20));
    s.instrumentalness = clamp01(std::abs(rng.normal(0.0, 0.30)));
    s.liveness = clamp01(rng.normal(0.22, 0.12));
    s.speechiness = clamp01(rng.normal(0.12, 0.08));
    s.loudness = std::clamp(rng.normal(-11.0, 4.5), -60.0, 0.0);
    s.tempo = std::clamp(rng.normal(112.0, 26.0), 40.0, 230.0);
    s.mode = rng.uniform() < 0.55 ? 1 : 0;
    s.explicit_flag = rng.uniform() < 0.18 ? 1 : 0;
    s.duration_ms =
        std::max<long long>(45000, std::llround(rng.normal(228000.0, 60000.0)));
    s.popularity = static_cast<int>(std::clamp(rng.normal(33.0, 14.0), 0.0, 100.0));
    const double u = rng.uniform();
    s.time_signature = u < 0.75 ? 4 : (u < 0.85 ? 3 : (u < 0.95 ? 5 : 6));
  }
  s.key = static_cast<int>(rng.bounded(12));
}

json song_to_api_json(const SynthSong& s) {
  json doc;
  doc["id"] = s.track_id;
  doc["name"] = s.spotify_title;
  doc["artists"] = json::array({{{"id", s.artist.id}, {"name", s.artist.name}}});
  doc["popularity"] = s.popularity;
  doc["explicit"] = s.explicit_flag == 1;
  doc["duration_ms"] = s.duration_ms;
  doc["preview_url"] = nullptr;
  doc["album"] = {{"id", s.album_id},
                  {"album_type", to_string(s.album_type)},
                  {"release_date", s.release.iso()}};
  return doc;
}

json features_to_api_json(const SynthSong& s) {
  json doc;
  doc["id"] = s.track_id;
  doc["acousticness"] = s.acousticness;
  doc["danceability"] = s.danceability;
  doc["energy"] = s.energy;
  doc["instrumentalness"] = s.instrumentalness;
  doc["liveness"] = s.liveness;
  doc["speechiness"] = s.speechiness;
  doc["valence"] = s.valence;
  doc["key"] = s.key;
  doc["loudness"] = s.loudness;
  doc["mode"] = s.mode;
  doc["tempo"] = s.tempo;
  doc["time_signature"] = s.time_signature;
  return doc;
}

void dump_to(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << doc.dump(1) << '\n';
}

}  // namespace

SynthStats generate_fixtures(const SynthConfig& config,
                             const std::filesystem::path& out_root) {
  std::filesystem::create_directories(out_root / "features");
  Rng rng(derive_seed(config.seed, 0x5717F1));
  SynthStats stats;

  const int window_start = Date{config.min_year, 1, 1}.days_since_epoch();
  const int window_end = Date{config.max_year, 12, 31}.days_since_epoch();

  // Artists: charting acts have short careers of several hits, so the mined
  // past-performance feature takes informative values.
  const int n_hit_artists = std::max(1, config.hit_tracks / 3);
  const int n_other_artists = std::max(1, config.non_hit_tracks / 3);
  std::vector<SynthArtist> artists;
  for (int i = 0; i < n_hit_artists + n_other_artists; ++i) {
    artists.push_back({make_artist_name(i), hex_id(rng, "ar")});
  }

  std::vector<SynthSong> songs;
  int title_counter = 0;
  for (int i = 0; i < config.hit_tracks + config.non_hit_tracks; ++i) {
    SynthSong s;
    s.hit = i < config.hit_tracks;
    s.track_id = hex_id(rng, "tr");
    s.album_id = hex_id(rng, "al");
    s.clean_title = make_title(title_counter++);
    s.spotify_title = s.clean_title;
    if (s.hit) {
      s.artist = artists[static_cast<std::size_t>(i % n_hit_artists)];
      // Hits need room to chart before the window closes.
      s.release = Date::from_days(
          window_start +
          static_cast<int>(rng.bounded(
              static_cast<std::uint64_t>(window_end - window_start - 90))));
      if (rng.uniform() < 0.10) {
        s.spotify_title +=
            " (feat. " +
            artists[rng.bounded(artists.size())].name + ")";
      }
    } else {
      // A slice of non-hits belongs to charting artists.
      const bool by_hit_artist = rng.uniform() < 0.08;
      s.artist = by_hit_artist
                     ? artists[static_cast<std::size_t>(rng.bounded(n_hit_artists))]
                     : artists[static_cast<std::size_t>(
                           n_hit_artists + rng.bounded(n_other_artists))];
      s.release = Date::from_days(
          window_start +
          static_cast<int>(rng.bounded(
              static_cast<std::uint64_t>(window_end - window_start))));
    }
    const double type_u = rng.uniform();
    s.album_type = type_u < 0.55 ? AlbumType::album
                   : type_u < 0.9 ? AlbumType::single
                                  : AlbumType::compilation;
    s.missing_features = rng.uniform() < config.missing_feature_rate;
    fill_features(s, rng);
    songs.push_back(std::move(s));
  }

  // Duplicate Spotify records of existing songs (same match key, different
  // id and lower popularity) to exercise the dedupe-with-accounting path.
  for (int i = 0; i < config.duplicate_records; ++i) {
    SynthSong copy = songs[static_cast<std::size_t>(
        rng.bounded(songs.size()))];
    copy.track_id = hex_id(rng, "tr");
    copy.album_id = hex_id(rng, "al");
    copy.album_type = AlbumType::compilation;
    copy.popularity = std::max(0, copy.popularity - 10);
    copy.missing_features = false;
    songs.push_back(std::move(copy));
  }

  // --- Spotify fixture pages, grouped by release year ---
  std::map<int, std::vector<const SynthSong*>> by_year;
  for (const auto& s : songs) by_year[s.release.year].push_back(&s);
  for (auto& [year, list] : by_year) {
    std::sort(list.begin(), list.end(),
              [](const SynthSong* a, const SynthSong* b) {
                return a->track_id < b->track_id;
              });
    const int pages = std::max<int>(
        1, static_cast<int>((list.size() + config.page_size - 1) /
                            static_cast<std::size_t>(config.page_size)));
    for (int p = 0; p < pages; ++p) {
      json page;
      page["items"] = json::array();
      const std::size_t begin = static_cast<std::size_t>(p) *
                                static_cast<std::size_t>(config.page_size);
      const std::size_t end = std::min(
          begin + static_cast<std::size_t>(config.page_size), list.size());
      for (std::size_t i = begin; i < end; ++i) {
        page["items"].push_back(song_to_api_json(*list[i]));
      }
      page["next"] = p + 1 < pages ? json(p + 1) : json(nullptr);
      const std::string name =
          p == 0 ? "tracks_" + std::to_string(year) + ".json"
                 : "tracks_" + std::to_string(year) + "_p" + std::to_string(p) +
                       ".json";
      dump_to(out_root / name, page);
    }
  }

  // --- per-id audio feature documents ---
  for (const auto& s : songs) {
    if (s.missing_features) {
      ++stats.missing_feature_records;
      continue;
    }
    dump_to(out_root / "features" / (s.track_id + ".json"),
            features_to_api_json(s));
  }

  // --- weekly charts ---
  // Greedy schedule: runs continue until they expire, eligible hits activate
  // as slots free up (evicting the longest-remaining run when full), and
  // chart-only filler songs pad each week to exactly 100 rows.
  struct ActiveRun {
    const SynthSong* song;
    int remaining;
  };
  std::vector<const SynthSong*> queue;
  for (int i = 0; i < config.hit_tracks; ++i) {
    queue.push_back(&songs[static_cast<std::size_t>(i)]);
  }
  std::sort(queue.begin(), queue.end(),
            [](const SynthSong* a, const SynthSong* b) {
              if (a->release != b->release) return a->release < b->release;
              return a->track_id < b->track_id;
            });
  std::deque<const SynthSong*> pending(queue.begin(), queue.end());

  std::vector<std::pair<std::string, std::string>> fillers;
  for (int i = 0; i < config.filler_songs; ++i) {
    fillers.emplace_back(make_title(title_counter++),
                         make_artist_name(n_hit_artists + n_other_artists + i));
  }

  const auto weeks = ingest::chart_saturdays(config.min_year, config.max_year);
  std::vector<ActiveRun> active;
  std::set<std::string> charted_ids;
  int filler_cursor = 0;
  for (const Date& week : weeks) {
    const int week_days = week.days_since_epoch();
    std::erase_if(active, [](const ActiveRun& r) { return r.remaining <= 0; });

    while (!pending.empty() &&
           pending.front()->release.days_since_epoch() + 7 <= week_days) {
      if (active.size() >= 100) {
        // Make room: truncate the run with the most weeks left.
        auto victim = std::max_element(
            active.begin(), active.end(), [](const ActiveRun& a, const ActiveRun& b) {
              if (a.remaining != b.remaining) return a.remaining < b.remaining;
              return a.song->track_id < b.song->track_id;
            });
        active.erase(victim);
      }
      const int run = 4 + static_cast<int>(rng.bounded(17));
      active.push_back({pending.front(), run});
      pending.pop_front();
    }

    json chart;
    chart["date"] = week.iso();
    chart["entries"] = json::array();
    std::vector<int> ranks(100);
    std::iota(ranks.begin(), ranks.end(), 1);
    Rng week_rng(derive_seed(config.seed, 0xC4A27,
                             static_cast<std::uint64_t>(week_days)));
    week_rng.shuffle(ranks);

    std::size_t slot = 0;
    for (auto& run : active) {
      chart["entries"].push_back({{"rank", ranks[slot++]},
                                  {"title", run.song->clean_title},
                                  {"artist", run.song->artist.name}});
      charted_ids.insert(run.song->track_id);
      --run.remaining;
    }
    while (slot < 100) {
      const auto& [title, artist] =
          fillers[static_cast<std::size_t>(filler_cursor++) % fillers.size()];
      chart["entries"].push_back(
          {{"rank", ranks[slot++]}, {"title", title}, {"artist", artist}});
    }
    stats.chart_rows += 100;
    ++stats.chart_weeks;
    dump_to(out_root / ("chart_" + week.iso() + ".json"), chart);
  }

  stats.spotify_records = static_cast<int>(songs.size());
  stats.hit_tracks = static_cast<int>(charted_ids.size());
  return stats;
}

}  // namespace hitforge::synth
