#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hitforge {

// Domain failures the CLI maps to exit code 1. Precondition violations use
// std::invalid_argument.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Calendar date with the precision the source reported. Year- and
// month-precision dates normalize to the first day of the period so release
// dates always have a total order.
enum class DatePrecision { year, month, day };

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;
  DatePrecision precision = DatePrecision::day;

  // Accepts "YYYY", "YYYY-MM" or "YYYY-MM-DD". Throws DomainError on
  // anything else.
  static Date parse(const std::string& text);

  std::string iso() const;  // always "YYYY-MM-DD"

  // Days since 1970-01-01 (proleptic Gregorian).
  int days_since_epoch() const;
  static Date from_days(int days);

  int weekday() const;  // 0 = Sunday .. 6 = Saturday

  friend bool operator==(const Date& a, const Date& b) {
    return a.year == b.year && a.month == b.month && a.day == b.day;
  }
  friend std::strong_ordering operator<=>(const Date& a, const Date& b) {
    if (auto c = a.year <=> b.year; c != 0) return c;
    if (auto c = a.month <=> b.month; c != 0) return c;
    return a.day <=> b.day;
  }
};

enum class AlbumType { album, single, compilation };

AlbumType album_type_from_string(const std::string& s);
std::string to_string(AlbumType t);

struct RawSpotifyTrack {
  std::string track_id;
  std::string track_title;
  std::string artist_title;
  std::string artist_id;
  int popularity = 0;  // 0..100
  int explicit_flag = 0;
  long long duration_ms = 0;
  std::optional<std::string> preview_url;
  std::string album_id;
  AlbumType album_type = AlbumType::album;
  Date album_release_date;

  void validate() const;  // throws DomainError on any broken invariant
};

struct AudioFeatures {
  std::string track_id;
  double acousticness = 0.0;
  double danceability = 0.0;
  double energy = 0.0;
  double instrumentalness = 0.0;
  double liveness = 0.0;
  double speechiness = 0.0;
  double valence = 0.0;
  int key = -1;  // 0..11, -1 = undetected
  double loudness = 0.0;
  int mode = 0;
  double tempo = 0.0;  // bpm, > 0
  int time_signature = 4;

  void validate() const;
};

struct ChartEntry {
  Date chart_date;
  int rank = 0;  // 1..100
  std::string track_title;
  std::string artist_title;
};

// One corpus row: raw track + audio features + the chart-derived fields.
struct Track {
  RawSpotifyTrack info;
  AudioFeatures audio;
  int weeks = 0;
  int rank = 0;  // peak (minimum) chart position, 0 = never charted
  double score = 0.0;
  int artist_past_hits = 0;
  int billboard_hit = 0;

  // hit == 1  <=>  weeks >= 1  <=>  rank in [1,100]; non-hits carry all
  // zeros. Throws DomainError when violated.
  void validate_labels() const;
};

inline constexpr int kMinChartYear = 1985;
inline constexpr int kMaxChartYear = 2018;

}  // namespace hitforge
