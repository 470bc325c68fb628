#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace immpc {

// All randomness flows through mt19937_64 streams whose seeds are derived from
// a master seed plus a tag path. Draw helpers below avoid the
// implementation-defined std:: distributions so runs are reproducible across
// standard libraries.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t));
  return h;
}

inline Rng make_stream(std::uint64_t master,
                       std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(master, tags));
}

// Stream tags. Values are arbitrary but frozen: changing them changes every
// seeded result.
namespace stream {
inline constexpr std::uint64_t kTruth = 0x7472757468ULL;
inline constexpr std::uint64_t kObserve = 0x6F6273ULL;
inline constexpr std::uint64_t kIntervene = 0x696E7476ULL;
inline constexpr std::uint64_t kScenario = 0x7363656EULL;
inline constexpr std::uint64_t kStratify = 0x7374726174ULL;
inline constexpr std::uint64_t kOutcome = 0x6F7574ULL;
inline constexpr std::uint64_t kTrial = 0x747269616CULL;
}  // namespace stream

// Counter-based uniform draw in [0,1): one hash per (seed, tags) key. Used
// where a full engine per key would be wasteful.
inline double hash_uniform(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  return static_cast<double>(splitmix64(derive_seed(master, tags)) >> 11) * 0x1.0p-53;
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

// Samples an index from unnormalized nonnegative weights.
template <typename Weights>
std::size_t categorical(Rng& rng, const Weights& w, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += w[i];
  double u = uniform01(rng) * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] <= 0.0) continue;
    last = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last;
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace immpc
