#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace hitforge {

// splitmix64 stream. Every seeded decision in the pipeline goes through this
// generator so results are reproducible across platforms and compilers;
// the standard <random> distributions are implementation-defined and would
// tie frozen test values to one library version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // [0,n), n > 0
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Box-Muller, cosine branch only: each call consumes exactly two draws,
  // keeping the stream position a pure function of the call count.
  double normal() {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Child seeds for independent streams (per tree, per trial, per week, ...).
// Pure function of its arguments: a trial's seed never depends on execution
// order or worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return detail::mix64(master ^ (stream * 0xd1b54a32d192ed03ULL) ^
                       0x8bb84b93962eacc9ULL);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  return detail::mix64(derive_seed(master, stream) ^
                       (index * 0x2545f4914f6cdd1dULL) ^ 0x9e6c63d0876a9a47ULL);
}

}  // namespace hitforge
