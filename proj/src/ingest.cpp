#include "hitforge/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace hitforge::ingest {

using nlohmann::json;

namespace {

class SteadyClock : public Clock {
 public:
  double now() override {
    const auto t = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double>(t).count();
  }
  void sleep_until(double t) override {
    const double dt = t - now();
    if (dt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(dt));
    }
  }
};

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw TransportError("missing fixture file " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw MalformedResponse("unparseable fixture " + path.string() + ": " +
                            e.what());
  }
  return doc;
}

}  // namespace

std::shared_ptr<Clock> steady_clock() { return std::make_shared<SteadyClock>(); }

RateLimiter::RateLimiter(int per_second, std::shared_ptr<Clock> clock)
    : per_second_(per_second), clock_(std::move(clock)) {
  if (per_second_ < 1) throw DomainError("rate_limit must be >= 1");
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  double now = clock_->now();
  while (true) {
    while (!window_.empty() && window_.front() <= now - 1.0) {
      window_.pop_front();
    }
    if (window_.size() < static_cast<std::size_t>(per_second_)) break;
    clock_->sleep_until(window_.front() + 1.0);
    now = clock_->now();
  }
  window_.push_back(now);
}

ThrottledTransport::ThrottledTransport(std::shared_ptr<WireTransport> inner,
                                       int per_second,
                                       std::shared_ptr<Clock> clock)
    : inner_(std::move(inner)), limiter_(per_second, std::move(clock)) {}

json ThrottledTransport::get(const WireRequest& request) {
  limiter_.acquire();
  return inner_->get(request);
}

FixtureTransport::FixtureTransport(std::filesystem::path root)
    : root_(std::move(root)) {
  if (!std::filesystem::is_directory(root_)) {
    throw TransportError("fixture root " + root_.string() +
                         " is not a directory");
  }
}

std::string FixtureTransport::fixture_name(const WireRequest& request) {
  if (request.endpoint == "tracks") {
    const std::string year = request.params.at("year");
    const std::string page =
        request.params.count("page") ? request.params.at("page") : "0";
    if (page == "0") return "tracks_" + year + ".json";
    return "tracks_" + year + "_p" + page + ".json";
  }
  if (request.endpoint == "chart") {
    return "chart_" + request.params.at("week") + ".json";
  }
  throw TransportError("no fixture naming rule for endpoint '" +
                       request.endpoint + "'");
}

json FixtureTransport::get(const WireRequest& request) {
  if (request.endpoint == "audio-features") {
    // Batch response assembled from the per-id documents, null for unknown
    // ids -- the shape the live endpoint serves.
    json out;
    out["audio_features"] = json::array();
    std::string ids = request.params.at("ids");
    std::size_t pos = 0;
    while (pos <= ids.size()) {
      const std::size_t comma = ids.find(',', pos);
      const std::string id = ids.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto path = root_ / "features" / (id + ".json");
      if (std::filesystem::exists(path)) {
        out["audio_features"].push_back(load_json_file(path));
      } else {
        out["audio_features"].push_back(nullptr);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return out;
  }
  return load_json_file(root_ / fixture_name(request));
}

namespace {

class HttpTransport : public WireTransport {
 public:
  explicit HttpTransport(LiveConfig config) : config_(std::move(config)) {}

  json get(const WireRequest& request) override {
    httplib::Client client(config_.base_url);
    client.set_bearer_token_auth(config_.bearer_token);
    client.set_follow_location(true);
    httplib::Params params(request.params.begin(), request.params.end());
    auto res = client.Get("/" + request.endpoint, params, httplib::Headers{});
    if (!res) {
      throw TransportError("request to " + request.endpoint + " failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
      throw TransportError("authentication rejected (HTTP " +
                           std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                           request.endpoint);
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw MalformedResponse(std::string("unparseable response body: ") +
                              e.what());
    }
  }

 private:
  LiveConfig config_;
};

}  // namespace

std::unique_ptr<WireTransport> make_live_transport(const LiveConfig& config) {
  return std::make_unique<HttpTransport>(config);
}

void TransportConfig::validate() const {
  if (mode == Mode::fixture && !fixture_root) {
    throw DomainError("fixture mode requires fixture_root");
  }
  if (mode == Mode::live && (!credentials || credentials->empty())) {
    throw DomainError("live mode requires credentials");
  }
  if (rate_limit < 1) throw DomainError("rate_limit must be >= 1");
}

std::shared_ptr<WireTransport> make_transport(const TransportConfig& config,
                                              std::shared_ptr<Clock> clock) {
  config.validate();
  if (config.mode == TransportConfig::Mode::fixture) {
    return std::make_shared<FixtureTransport>(*config.fixture_root);
  }
  auto live = make_live_transport({config.base_url, *config.credentials});
  return std::make_shared<ThrottledTransport>(std::move(live),
                                              config.rate_limit, clock);
}

RawSpotifyTrack parse_track(const json& doc) {
  RawSpotifyTrack t;
  try {
    t.track_id = doc.at("id").get<std::string>();
    t.track_title = doc.at("name").get<std::string>();
    const auto& artists = doc.at("artists");
    if (!artists.is_array() || artists.empty()) {
      throw MalformedResponse("track " + t.track_id + " has no artists");
    }
    t.artist_title = artists[0].at("name").get<std::string>();
    t.artist_id = artists[0].at("id").get<std::string>();
    t.popularity = doc.at("popularity").get<int>();
    t.explicit_flag = doc.at("explicit").get<bool>() ? 1 : 0;
    t.duration_ms = doc.at("duration_ms").get<long long>();
    if (doc.contains("preview_url") && !doc.at("preview_url").is_null()) {
      t.preview_url = doc.at("preview_url").get<std::string>();
    }
    const auto& album = doc.at("album");
    t.album_id = album.at("id").get<std::string>();
    t.album_type = album_type_from_string(album.at("album_type").get<std::string>());
    t.album_release_date = Date::parse(album.at("release_date").get<std::string>());
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("malformed track object: ") + e.what());
  }
  t.validate();
  return t;
}

AudioFeatures parse_audio_features(const json& doc) {
  AudioFeatures f;
  try {
    f.track_id = doc.at("id").get<std::string>();
    f.acousticness = doc.at("acousticness").get<double>();
    f.danceability = doc.at("danceability").get<double>();
    f.energy = doc.at("energy").get<double>();
    f.instrumentalness = doc.at("instrumentalness").get<double>();
    f.liveness = doc.at("liveness").get<double>();
    f.speechiness = doc.at("speechiness").get<double>();
    f.valence = doc.at("valence").get<double>();
    f.key = doc.at("key").get<int>();
    f.loudness = doc.at("loudness").get<double>();
    f.mode = doc.at("mode").get<int>();
    f.tempo = doc.at("tempo").get<double>();
    f.time_signature = doc.at("time_signature").get<int>();
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("malformed audio-features object: ") +
                            e.what());
  }
  f.validate();
  return f;
}

ChartEntry parse_chart_entry(const json& doc, const Date& week) {
  ChartEntry e;
  try {
    e.rank = doc.at("rank").get<int>();
    e.track_title = doc.at("title").get<std::string>();
    e.artist_title = doc.at("artist").get<std::string>();
  } catch (const json::exception& e2) {
    throw MalformedResponse(std::string("malformed chart row: ") + e2.what());
  }
  e.chart_date = week;
  if (e.rank < 1 || e.rank > 100) {
    throw MalformedResponse("chart " + week.iso() + ": rank " +
                            std::to_string(e.rank) + " outside [1,100]");
  }
  return e;
}

std::vector<RawSpotifyTrack> fetch_tracks_by_year(WireTransport& transport,
                                                  int year) {
  if (year < kMinChartYear || year > kMaxChartYear) {
    throw std::invalid_argument("year " + std::to_string(year) +
                                " outside the corpus window [1985,2018]");
  }
  std::vector<RawSpotifyTrack> out;
  int page = 0;
  while (true) {
    WireRequest req{"tracks",
                    {{"year", std::to_string(year)}, {"page", std::to_string(page)}}};
    const json doc = transport.get(req);
    if (!doc.contains("items") || !doc.at("items").is_array()) {
      throw MalformedResponse("tracks response for year " +
                              std::to_string(year) + " has no items array");
    }
    for (const auto& item : doc.at("items")) {
      RawSpotifyTrack t = parse_track(item);
      if (t.album_release_date.year != year) {
        throw MalformedResponse("track " + t.track_id + " released " +
                                t.album_release_date.iso() +
                                " served in year " + std::to_string(year));
      }
      out.push_back(std::move(t));
    }
    const auto& next = doc.contains("next") ? doc.at("next") : json(nullptr);
    if (next.is_null()) break;
    page = next.get<int>();
  }
  return out;
}

std::vector<std::optional<AudioFeatures>> fetch_audio_features(
    WireTransport& transport, const std::vector<std::string>& track_ids) {
  if (track_ids.empty()) {
    throw std::invalid_argument("fetch_audio_features: empty id list");
  }
  for (const auto& id : track_ids) {
    if (id.empty()) {
      throw std::invalid_argument("fetch_audio_features: blank id");
    }
  }
  std::vector<std::optional<AudioFeatures>> out;
  out.reserve(track_ids.size());
  for (std::size_t begin = 0; begin < track_ids.size();
       begin += kAudioFeatureBatch) {
    const std::size_t end =
        std::min(begin + kAudioFeatureBatch, track_ids.size());
    std::string joined;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) joined.push_back(',');
      joined += track_ids[i];
    }
    const json doc =
        transport.get(WireRequest{"audio-features", {{"ids", joined}}});
    if (!doc.contains("audio_features") || !doc.at("audio_features").is_array()) {
      throw MalformedResponse("audio-features response missing array");
    }
    const auto& arr = doc.at("audio_features");
    if (arr.size() != end - begin) {
      throw MalformedResponse("audio-features batch size mismatch");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (arr[i].is_null()) {
        out.push_back(std::nullopt);
      } else {
        AudioFeatures f = parse_audio_features(arr[i]);
        if (f.track_id != track_ids[begin + i]) {
          throw MalformedResponse("audio-features out of order: expected " +
                                  track_ids[begin + i] + ", got " + f.track_id);
        }
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

std::vector<ChartEntry> fetch_chart_week(WireTransport& transport,
                                         const Date& week) {
  if (week < Date{kMinChartYear, 1, 1} || Date{kMaxChartYear, 12, 31} < week) {
    throw std::invalid_argument("chart week " + week.iso() +
                                " outside the corpus window");
  }
  const json doc = transport.get(WireRequest{"chart", {{"week", week.iso()}}});
  if (!doc.contains("entries") || !doc.at("entries").is_array()) {
    throw MalformedResponse("chart response for " + week.iso() +
                            " has no entries array");
  }
  std::vector<ChartEntry> out;
  std::set<int> ranks;
  for (const auto& row : doc.at("entries")) {
    ChartEntry e = parse_chart_entry(row, week);
    if (!ranks.insert(e.rank).second) {
      throw MalformedResponse("chart " + week.iso() + ": duplicate rank " +
                              std::to_string(e.rank));
    }
    out.push_back(std::move(e));
  }
  if (out.size() != 100) {
    throw MalformedResponse("chart " + week.iso() + " has " +
                            std::to_string(out.size()) + " rows, expected 100");
  }
  return out;
}

namespace {

json track_to_json(const JoinedTrack& t) {
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
  doc["release_date_precision"] =
      t.info.album_release_date.precision == DatePrecision::year    ? "year"
      : t.info.album_release_date.precision == DatePrecision::month ? "month"
                                                                    : "day";
  if (t.audio) {
    const AudioFeatures& f = *t.audio;
    doc["acousticness"] = f.acousticness;
    doc["danceability"] = f.danceability;
    doc["energy"] = f.energy;
    doc["instrumentalness"] = f.instrumentalness;
    doc["liveness"] = f.liveness;
    doc["speechiness"] = f.speechiness;
    doc["valence"] = f.valence;
    doc["key"] = f.key;
    doc["loudness"] = f.loudness;
    doc["mode"] = f.mode;
    doc["tempo"] = f.tempo;
    doc["time_signature"] = f.time_signature;
    doc["audio_features_missing"] = false;
  } else {
    doc["audio_features_missing"] = true;
  }
  return doc;
}

JoinedTrack track_from_json(const json& doc) {
  JoinedTrack t;
  t.info.track_id = doc.at("track_id").get<std::string>();
  t.info.track_title = doc.at("track_title").get<std::string>();
  t.info.artist_title = doc.at("artist_title").get<std::string>();
  t.info.artist_id = doc.at("artist_id").get<std::string>();
  t.info.popularity = doc.at("popularity").get<int>();
  t.info.explicit_flag = doc.at("explicit").get<int>();
  t.info.duration_ms = doc.at("duration_ms").get<long long>();
  if (!doc.at("preview_url").is_null()) {
    t.info.preview_url = doc.at("preview_url").get<std::string>();
  }
  t.info.album_id = doc.at("album_id").get<std::string>();
  t.info.album_type =
      album_type_from_string(doc.at("album_type").get<std::string>());
  t.info.album_release_date =
      Date::parse(doc.at("album_release_date").get<std::string>());
  const std::string prec = doc.at("release_date_precision").get<std::string>();
  t.info.album_release_date.precision = prec == "year"    ? DatePrecision::year
                                        : prec == "month" ? DatePrecision::month
                                                          : DatePrecision::day;
  if (!doc.at("audio_features_missing").get<bool>()) {
    AudioFeatures f;
    f.track_id = t.info.track_id;
    f.acousticness = doc.at("acousticness").get<double>();
    f.danceability = doc.at("danceability").get<double>();
    f.energy = doc.at("energy").get<double>();
    f.instrumentalness = doc.at("instrumentalness").get<double>();
    f.liveness = doc.at("liveness").get<double>();
    f.speechiness = doc.at("speechiness").get<double>();
    f.valence = doc.at("valence").get<double>();
    f.key = doc.at("key").get<int>();
    f.loudness = doc.at("loudness").get<double>();
    f.mode = doc.at("mode").get<int>();
    f.tempo = doc.at("tempo").get<double>();
    f.time_signature = doc.at("time_signature").get<int>();
    t.audio = std::move(f);
  }
  return t;
}

}  // namespace

void write_spotify_jsonl(const std::filesystem::path& path,
                         const std::vector<JoinedTrack>& tracks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  for (const auto& t : tracks) {
    out << track_to_json(t).dump() << '\n';
  }
}

std::vector<JoinedTrack> read_spotify_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::vector<JoinedTrack> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(track_from_json(json::parse(line)));
  }
  return out;
}

void write_charts_jsonl(const std::filesystem::path& path,
                        const std::vector<ChartEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  for (const auto& e : entries) {
    json doc;
    doc["chart_date"] = e.chart_date.iso();
    doc["rank"] = e.rank;
    doc["track_title"] = e.track_title;
    doc["artist_title"] = e.artist_title;
    out << doc.dump() << '\n';
  }
}

std::vector<ChartEntry> read_charts_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::vector<ChartEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json doc = json::parse(line);
    ChartEntry e;
    e.chart_date = Date::parse(doc.at("chart_date").get<std::string>());
    e.rank = doc.at("rank").get<int>();
    e.track_title = doc.at("track_title").get<std::string>();
    e.artist_title = doc.at("artist_title").get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Date> chart_saturdays(int min_year, int max_year) {
  std::vector<Date> out;
  int d = Date{min_year, 1, 1}.days_since_epoch();
  while (Date::from_days(d).weekday() != 6) ++d;
  const int last = Date{max_year, 12, 31}.days_since_epoch();
  for (; d <= last; d += 7) {
    out.push_back(Date::from_days(d));
  }
  return out;
}

}  // namespace hitforge::ingest
