#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace iwagg {

/// Philox4x32-10 counter-based generator.
///
/// Output is a pure function of (seed, stream, counter). Normal variates use
/// Box-Muller; std:: distributions are not used anywhere.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Generator on a different stream of the same seed.
  CounterRng substream(std::uint64_t stream) const { return CounterRng(seed_, stream); }

  std::uint64_t seed() const { return seed_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// One round of the Philox4x32 bijection family, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Deterministic child seed for (seed, index), e.g. per-trial seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

}  // namespace iwagg
