#pragma once

#include <cstdint>
#include <random>

namespace pkp {

/// Seeded random stream. Child streams are derived from the seed and a key,
/// never from the engine position, so `split(k)` is the same no matter how
/// many draws the parent has made.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream split(std::uint64_t key) const;
  std::uint64_t seed() const { return seed_; }

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);
  /// Standard normal draw.
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pkp
