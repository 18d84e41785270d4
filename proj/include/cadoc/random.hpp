#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cadoc {

// Mixes a base seed with a stream index so that independent workers (one per
// document, one per thread) draw from unrelated sequences.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Thin wrapper over mt19937_64 with conversions that do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, n).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Sampling from a fixed discrete distribution through its cumulative table.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  // Masses need not be normalized; all must be finite and >= 0 with a
  // positive total.
  explicit DiscreteSampler(std::span<const double> masses);

  std::size_t sample(Rng& rng) const;

  std::size_t size() const { return probabilities_.size(); }
  bool empty() const { return probabilities_.empty(); }
  std::span<const double> probabilities() const { return probabilities_; }
  std::span<const double> cumulative() const { return cumulative_; }

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

}  // namespace cadoc
