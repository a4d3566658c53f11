#pragma once

#include <cstdint>
#include <random>

namespace sfld {

namespace detail {

// splitmix64; used to decorrelate derived stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seeded random stream. Substreams derived from (seed, index) are
/// statistically independent and reproducible, so ensembles can be
/// parallelized without sharing state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : seed_(seed), engine_(detail::splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent stream for worker/path `index` of this stream.
  RngStream substream(std::uint64_t index) const {
    return RngStream(detail::splitmix64(seed_ ^ (0xA3EC647659359ACDULL * (index + 1))));
  }

  double uniform() { return uniform_(engine_); }

  double normal() { return normal_(engine_); }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return static_cast<std::uint64_t>(dist(engine_));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sfld
