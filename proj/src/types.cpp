#include "hitforge/types.hpp"

#include <charconv>
#include <cstdio>

namespace hitforge {

namespace {

int parse_int(const std::string& text, std::size_t begin, std::size_t end) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data() + begin, text.data() + end, value);
  if (ec != std::errc() || ptr != text.data() + end) {
    throw DomainError("bad date component in '" + text + "'");
  }
  return value;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && leap(y)) return 29;
  return kDays[m - 1];
}

}  // namespace

Date Date::parse(const std::string& text) {
  Date d;
  if (text.size() == 4) {
    d.year = parse_int(text, 0, 4);
    d.precision = DatePrecision::year;
  } else if (text.size() == 7 && text[4] == '-') {
    d.year = parse_int(text, 0, 4);
    d.month = parse_int(text, 5, 7);
    d.precision = DatePrecision::month;
  } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    d.year = parse_int(text, 0, 4);
    d.month = parse_int(text, 5, 7);
    d.day = parse_int(text, 8, 10);
    d.precision = DatePrecision::day;
  } else {
    throw DomainError("unparseable date '" + text + "'");
  }
  if (d.month < 1 || d.month > 12 || d.day < 1 ||
      d.day > days_in_month(d.year, d.month)) {
    throw DomainError("out-of-range date '" + text + "'");
  }
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

int Date::days_since_epoch() const {
  int y = year;
  const unsigned m = static_cast<unsigned>(month);
  const unsigned d = static_cast<unsigned>(day);
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

Date Date::from_days(int days) {
  int z = days + 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  Date out;
  out.year = y + (m <= 2);
  out.month = static_cast<int>(m);
  out.day = static_cast<int>(d);
  return out;
}

int Date::weekday() const {
  const int d = days_since_epoch();
  return ((d % 7) + 11) % 7;  // 1970-01-01 was a Thursday
}

AlbumType album_type_from_string(const std::string& s) {
  if (s == "album") return AlbumType::album;
  if (s == "single") return AlbumType::single;
  if (s == "compilation") return AlbumType::compilation;
  throw DomainError("unknown album_type '" + s + "'");
}

std::string to_string(AlbumType t) {
  switch (t) {
    case AlbumType::album: return "album";
    case AlbumType::single: return "single";
    case AlbumType::compilation: return "compilation";
  }
  throw DomainError("bad album_type value");
}

void RawSpotifyTrack::validate() const {
  if (track_id.empty() || artist_id.empty() || album_id.empty()) {
    throw DomainError("track '" + track_title + "' has an empty id");
  }
  if (popularity < 0 || popularity > 100) {
    throw DomainError("track " + track_id + ": popularity out of [0,100]");
  }
  if (explicit_flag != 0 && explicit_flag != 1) {
    throw DomainError("track " + track_id + ": explicit must be 0/1");
  }
  if (duration_ms <= 0) {
    throw DomainError("track " + track_id + ": non-positive duration_ms");
  }
}

void AudioFeatures::validate() const {
  const std::pair<const char*, double> unit[] = {
      {"acousticness", acousticness}, {"danceability", danceability},
      {"energy", energy},             {"instrumentalness", instrumentalness},
      {"liveness", liveness},         {"speechiness", speechiness},
      {"valence", valence}};
  for (const auto& [name, v] : unit) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("features " + track_id + ": " + name +
                        " outside [0,1]");
    }
  }
  if (key < -1 || key > 11) {
    throw DomainError("features " + track_id + ": key outside [-1,11]");
  }
  if (mode != 0 && mode != 1) {
    throw DomainError("features " + track_id + ": mode must be 0/1");
  }
  if (!(tempo > 0.0)) {
    throw DomainError("features " + track_id + ": tempo must be positive");
  }
  if (time_signature < 3 || time_signature > 7) {
    throw DomainError("features " + track_id + ": time_signature outside [3,7]");
  }
}

void Track::validate_labels() const {
  const bool hit = billboard_hit == 1;
  if (billboard_hit != 0 && billboard_hit != 1) {
    throw DomainError("track " + info.track_id + ": billboard_hit must be 0/1");
  }
  if (hit != (weeks >= 1) || hit != (rank >= 1 && rank <= 100)) {
    throw DomainError("track " + info.track_id +
                      ": inconsistent hit/weeks/rank labels");
  }
  if (!hit && (score != 0.0 || rank != 0 || weeks != 0)) {
    throw DomainError("track " + info.track_id +
                      ": non-hit carries chart-derived values");
  }
  if (score < 0.0 || score > 1.0) {
    throw DomainError("track " + info.track_id + ": score outside [0,1]");
  }
}

}  // namespace hitforge
