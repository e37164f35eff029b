#include "hitforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "hitforge/csv.hpp"

namespace hitforge::feat {

namespace {

const std::set<std::string>& known_features() {
  static const std::set<std::string> kKnown = {
      "acousticness", "danceability", "energy",        "instrumentalness",
      "liveness",     "speechiness",  "valence",       "key",
      "loudness",     "mode",         "tempo",         "time_signature",
      "duration_ms",  "explicit",     "artist_past_hits"};
  return kKnown;
}

const std::set<std::string>& leaking_fields() {
  static const std::set<std::string> kLeaking = {"popularity", "weeks", "rank",
                                                 "score"};
  return kLeaking;
}

}  // namespace

std::vector<std::string> default_schema_names() {
  return {"acousticness", "danceability", "energy",        "instrumentalness",
          "liveness",     "speechiness",  "valence",       "key",
          "loudness",     "mode",         "tempo",         "time_signature",
          "duration_ms",  "explicit",     "artist_past_hits"};
}

bool is_flag_feature(const std::string& name) {
  return name == "mode" || name == "explicit";
}

FeatureSchema::FeatureSchema(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) throw DomainError("feature schema is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (leaking_fields().count(n)) {
      throw DomainError("schema field '" + n + "' leaks the label");
    }
    if (!known_features().count(n)) {
      throw DomainError("unknown schema field '" + n + "'");
    }
    if (!seen.insert(n).second) {
      throw DomainError("duplicate schema field '" + n + "'");
    }
  }
}

FeatureSchema FeatureSchema::defaults() {
  return FeatureSchema(default_schema_names());
}

double feature_value(const Track& t, const std::string& name) {
  if (name == "acousticness") return t.audio.acousticness;
  if (name == "danceability") return t.audio.danceability;
  if (name == "energy") return t.audio.energy;
  if (name == "instrumentalness") return t.audio.instrumentalness;
  if (name == "liveness") return t.audio.liveness;
  if (name == "speechiness") return t.audio.speechiness;
  if (name == "valence") return t.audio.valence;
  if (name == "key") return static_cast<double>(t.audio.key);
  if (name == "loudness") return t.audio.loudness;
  if (name == "mode") return static_cast<double>(t.audio.mode);
  if (name == "tempo") return t.audio.tempo;
  if (name == "time_signature") return static_cast<double>(t.audio.time_signature);
  if (name == "duration_ms") return static_cast<double>(t.info.duration_ms);
  if (name == "explicit") return static_cast<double>(t.info.explicit_flag);
  if (name == "artist_past_hits") return static_cast<double>(t.artist_past_hits);
  throw DomainError("unknown feature '" + name + "'");
}

ScalerStats fit_scaler(const std::vector<Track>& train,
                       const FeatureSchema& schema) {
  if (train.empty()) throw std::invalid_argument("fit_scaler: empty train set");
  ScalerStats stats;
  const std::size_t d = schema.size();
  stats.mean.assign(d, 0.0);
  stats.stddev.assign(d, 1.0);
  stats.passthrough.assign(d, false);
  const double n = static_cast<double>(train.size());
  for (std::size_t c = 0; c < d; ++c) {
    const std::string& name = schema.names()[c];
    if (is_flag_feature(name)) {
      stats.passthrough[c] = true;
      continue;
    }
    double sum = 0.0;
    for (const auto& t : train) sum += feature_value(t, name);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& t : train) {
      const double dlt = feature_value(t, name) - mean;
      ss += dlt * dlt;
    }
    const double std = std::sqrt(ss / n);  // population std
    if (!(std > 0.0)) {
      throw DomainError("constant training column '" + name +
                        "' cannot be standardized");
    }
    stats.mean[c] = mean;
    stats.stddev[c] = std;
  }
  return stats;
}

FeatureMatrix FeatureMatrix::from_raw(std::size_t rows, std::size_t cols,
                                      std::vector<double> values,
                                      std::vector<int> labels) {
  if (values.size() != rows * cols || labels.size() != rows) {
    throw std::invalid_argument("from_raw: shape mismatch");
  }
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.data = std::move(values);
  m.labels = std::move(labels);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  m.schema = FeatureSchema();  // generic columns, no named schema
  m.scaler.mean.assign(cols, 0.0);
  m.scaler.stddev.assign(cols, 1.0);
  m.scaler.passthrough.assign(cols, true);
  return m;
}

FeatureMatrix build_matrix(const std::vector<Track>& tracks,
                           const FeatureSchema& schema,
                           const ScalerStats& scaler) {
  const std::size_t d = schema.size();
  if (scaler.mean.size() != d || scaler.stddev.size() != d ||
      scaler.passthrough.size() != d) {
    throw std::invalid_argument("scaler was fitted over a different schema");
  }
  FeatureMatrix m;
  m.rows = tracks.size();
  m.cols = d;
  m.schema = schema;
  m.scaler = scaler;
  m.data.resize(m.rows * d);
  m.labels.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const Track& t = tracks[r];
    for (std::size_t c = 0; c < d; ++c) {
      double v = feature_value(t, schema.names()[c]);
      if (!std::isfinite(v)) {
        throw DomainError("non-finite value in feature '" + schema.names()[c] +
                          "' of track " + t.info.track_id);
      }
      if (!scaler.passthrough[c]) {
        v = (v - scaler.mean[c]) / scaler.stddev[c];
      }
      m.data[r * d + c] = v;
    }
    m.labels[r] = t.billboard_hit;
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& path,
                      const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  const auto& names = m.schema.names();
  for (std::size_t c = 0; c < m.cols; ++c) {
    out << (c ? "," : "")
        << (c < names.size() ? names[c] : "f" + std::to_string(c));
  }
  out << (m.cols ? "," : "") << "label\n";
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      out << (c ? "," : "") << csvio::format_exact(m.at(r, c));
    }
    out << ',' << m.labels[r] << '\n';
  }
}

FeatureMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty matrix CSV");
  const auto header = csvio::split_record(line);
  if (header.empty() || header.back() != "label") {
    throw DomainError("matrix CSV must end with a label column");
  }
  const std::size_t d = header.size() - 1;
  FeatureMatrix m;
  m.cols = d;
  std::vector<std::string> names(header.begin(), header.end() - 1);
  bool generic = false;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == "f" + std::to_string(c)) generic = true;
  }
  if (!generic && d > 0) m.schema = FeatureSchema(names);
  m.scaler.mean.assign(d, 0.0);
  m.scaler.stddev.assign(d, 1.0);
  m.scaler.passthrough.assign(d, true);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csvio::split_record(line);
    if (f.size() != d + 1) throw DomainError("matrix CSV row width mismatch");
    for (std::size_t c = 0; c < d; ++c) m.data.push_back(std::stod(f[c]));
    m.labels.push_back(std::stoi(f[d]));
    ++m.rows;
  }
  return m;
}

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  // Little-endian hosts only; the on-disk layout is documented as LE.
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T take(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DomainError("truncated matrix file");
  return v;
}

constexpr char kMagic[4] = {'H', 'F', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_matrix_binary(const std::filesystem::path& path,
                         const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, m.rows);
  put<std::uint64_t>(out, m.cols);
  const auto& names = m.schema.names();
  for (std::size_t c = 0; c < m.cols; ++c) {
    const std::string name =
        c < names.size() ? names[c] : "f" + std::to_string(c);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<double>(out, m.scaler.mean[c]);
    put<double>(out, m.scaler.stddev[c]);
    put<std::uint8_t>(out, m.scaler.passthrough[c] ? 1 : 0);
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(m.labels[r]));
  }
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

FeatureMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DomainError(path.string() + " is not a matrix file");
  }
  if (take<std::uint32_t>(in) != kVersion) {
    throw DomainError("unsupported matrix file version");
  }
  FeatureMatrix m;
  m.rows = take<std::uint64_t>(in);
  m.cols = take<std::uint64_t>(in);
  std::vector<std::string> names;
  bool generic = false;
  for (std::size_t c = 0; c < m.cols; ++c) {
    const auto len = take<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (name == "f" + std::to_string(c)) generic = true;
    names.push_back(std::move(name));
    m.scaler.mean.push_back(take<double>(in));
    m.scaler.stddev.push_back(take<double>(in));
    m.scaler.passthrough.push_back(take<std::uint8_t>(in) != 0);
  }
  if (!generic && m.cols > 0) m.schema = FeatureSchema(names);
  m.labels.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    m.labels[r] = take<std::uint8_t>(in);
  }
  m.data.resize(m.rows * m.cols);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!in) throw DomainError("truncated matrix file");
  return m;
}

}  // namespace hitforge::feat
