#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace brownne {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded pseudo-random stream. Independent substreams are derived from a
/// master seed by hashing (tag, index), so the stream a task receives depends
/// only on its identity and never on scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  static RandomStream derive(std::uint64_t master, std::string_view tag, std::uint64_t index = 0);

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace brownne
