#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace t2sim {

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic counter-based generator (splitmix64). The whole simulator
/// draws from streams of this type: same seed, same platform, same sequence.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform in [0,1) with 53-bit resolution.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Box-Muller; consumes exactly two draws per call.
  double normal(double mean, double sigma) {
    double u1 = 1.0 - u01();  // (0,1], keeps log finite
    double u2 = u01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  uint64_t state() const { return state_; }
  bool operator==(const RngStream&) const = default;

 private:
  uint64_t state_ = 0;
};

inline uint64_t hash_str(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return detail::mix64(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
}

/// Independent reproducible substream: same (seed, id, tag) -> same sequence.
inline RngStream derive_stream(uint64_t root_seed, uint64_t entity_id,
                               std::string_view tag) {
  uint64_t h = hash_combine(hash_combine(root_seed, entity_id), hash_str(tag));
  return RngStream(h);
}

/// One-shot zero-mean normal draw keyed by (seed, key, tag). Used for
/// per-(link, frame) shadowing so the value is independent of event order.
inline double stateless_normal(uint64_t root_seed, uint64_t key,
                               std::string_view tag, double sigma) {
  if (sigma <= 0.0) {
    return 0.0;
  }
  RngStream s = derive_stream(root_seed, key, tag);
  return s.normal(0.0, sigma);
}

}  // namespace t2sim
