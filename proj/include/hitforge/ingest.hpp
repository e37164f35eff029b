#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hitforge/types.hpp"
#include "json.hpp"

namespace hitforge::ingest {

// One API request. `params` keeps a deterministic (sorted) order so fixture
// file names are stable.
struct WireRequest {
  std::string endpoint;  // "tracks" | "audio-features" | "chart"
  std::map<std::string, std::string> params;
};

class TransportError : public DomainError {
 public:
  using DomainError::DomainError;
};

class MalformedResponse : public DomainError {
 public:
  using DomainError::DomainError;
};

// The wire seam shared by live HTTP, the offline fixture directory and the
// counting stubs used in tests. Implementations must be safe to call from
// multiple threads.
class WireTransport {
 public:
  virtual ~WireTransport() = default;
  virtual nlohmann::json get(const WireRequest& request) = 0;
};

// Monotonic-time seam so the rate limiter is testable with a fake clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;  // seconds
  virtual void sleep_until(double t) = 0;
};

std::shared_ptr<Clock> steady_clock();

// Sliding-window limiter: no 1-second window ever sees more than
// `per_second` dispatches. Accounting is serialized across threads.
class RateLimiter {
 public:
  RateLimiter(int per_second, std::shared_ptr<Clock> clock);
  void acquire();

 private:
  int per_second_;
  std::shared_ptr<Clock> clock_;
  std::deque<double> window_;
  std::mutex mu_;
};

class ThrottledTransport : public WireTransport {
 public:
  ThrottledTransport(std::shared_ptr<WireTransport> inner, int per_second,
                     std::shared_ptr<Clock> clock);
  nlohmann::json get(const WireRequest& request) override;

 private:
  std::shared_ptr<WireTransport> inner_;
  RateLimiter limiter_;
};

// Serves the JSON documents under a fixture directory. One document per
// request shape; audio-features requests assemble their batch response from
// the per-id documents under features/.
class FixtureTransport : public WireTransport {
 public:
  explicit FixtureTransport(std::filesystem::path root);
  nlohmann::json get(const WireRequest& request) override;

  // "tracks_1991.json", "tracks_1991_p2.json", "chart_2017-03-04.json", ...
  static std::string fixture_name(const WireRequest& request);

 private:
  std::filesystem::path root_;
};

struct LiveConfig {
  std::string base_url;  // e.g. "https://api.example.com"
  std::string bearer_token;
};

// HTTPS GET with a bearer-token header. Kept behind a factory so the HTTP
// client library stays out of this header.
std::unique_ptr<WireTransport> make_live_transport(const LiveConfig& config);

struct TransportConfig {
  enum class Mode { live, fixture };
  Mode mode = Mode::fixture;
  std::optional<std::string> credentials;               // live
  std::optional<std::filesystem::path> fixture_root;    // fixture
  std::string base_url = "https://api.spotify.example";  // live
  int rate_limit = 10;  // requests/second

  void validate() const;
};

std::shared_ptr<WireTransport> make_transport(
    const TransportConfig& config,
    std::shared_ptr<Clock> clock = steady_clock());

// Parsers shared by live and fixture payloads (the fixture documents carry
// the public API response shapes).
RawSpotifyTrack parse_track(const nlohmann::json& doc);
AudioFeatures parse_audio_features(const nlohmann::json& doc);
ChartEntry parse_chart_entry(const nlohmann::json& doc, const Date& week);

// --- operations ---

// All pages for one release year, in server order.
std::vector<RawSpotifyTrack> fetch_tracks_by_year(WireTransport& transport,
                                                  int year);

// One entry per input id, in input order; std::nullopt marks ids the source
// could not resolve. Ids are chunked into batches of at most 100 per request.
std::vector<std::optional<AudioFeatures>> fetch_audio_features(
    WireTransport& transport, const std::vector<std::string>& track_ids);

inline constexpr std::size_t kAudioFeatureBatch = 100;

// Exactly 100 entries carrying `week`, ranks a permutation of 1..100.
std::vector<ChartEntry> fetch_chart_week(WireTransport& transport,
                                         const Date& week);

// --- persistence (JSON Lines, one record per line) ---

struct JoinedTrack {
  RawSpotifyTrack info;
  std::optional<AudioFeatures> audio;  // nullopt = explicit missing marker
};

void write_spotify_jsonl(const std::filesystem::path& path,
                         const std::vector<JoinedTrack>& tracks);
std::vector<JoinedTrack> read_spotify_jsonl(const std::filesystem::path& path);

void write_charts_jsonl(const std::filesystem::path& path,
                        const std::vector<ChartEntry>& entries);
std::vector<ChartEntry> read_charts_jsonl(const std::filesystem::path& path);

// Billboard-style weeks are Saturdays; all of them inside [min_year, max_year].
std::vector<Date> chart_saturdays(int min_year, int max_year);

}  // namespace hitforge::ingest
