#ifndef QERGO_RNG_HPP
#define QERGO_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace qergo {

// SplitMix64: the project-wide counter-based generator. Results are
// reproducible across platforms and compilers because only 64-bit integer
// arithmetic is involved. One stream per purpose; streams are derived from
// the master seed by hashing a fixed label (see derive_stream).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bias-free via rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// FNV-1a, used only to turn stream labels into seed perturbations.
inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : label) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Independent stream for a named purpose ("graph", "potential", ...).
inline SplitMix64 derive_stream(std::uint64_t master_seed, std::string_view label) {
  SplitMix64 mixer(master_seed ^ hash_label(label));
  // Burn one output so that streams with nearby seeds decorrelate.
  return SplitMix64(mixer.next());
}

// Deterministic Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace qergo

#endif  // QERGO_RNG_HPP
