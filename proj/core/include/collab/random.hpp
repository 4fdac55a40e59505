#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace collab {

/// Seeded random source. The engine is mt19937_64, whose output sequence is
/// fixed by the standard; the distributions below are implemented here so that
/// draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for (seed, stream), e.g. one per bagging member.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller.
  double normal();

  /// First `count` entries of a uniform random permutation of [0, n).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace collab
