#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mipt {

/// Philox4x32-10 block function (Salmon et al., Random123). Maps a 128-bit
/// counter to 128 pseudo-random bits under a 64-bit key. Bijective in the
/// counter for a fixed key, so disjoint counter ranges give disjoint output.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z);

/// Seed of trajectory `index` under a run's base seed:
///   mix64(base_seed + 0x9E3779B97F4A7C15 * (index + 1)).
/// For a fixed base seed distinct indices map to distinct seeds.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Named sub-streams of one trajectory's generator.
enum class Stream : std::uint32_t {
  schedule = 0,
  outcomes = 1,
  initial_state = 2,
  test = 7,
};

/// Counter-based generator. The counter block is
/// (draw_index_lo, draw_index_hi, stream_id, 0) and the key is the 64-bit
/// seed, so every (seed, stream) pair owns a disjoint, jump-free sequence
/// whose output does not depend on the platform.
///
/// Satisfies std::uniform_random_bit_generator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, Stream stream = Stream::test,
                      std::uint64_t cursor = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Poisson variate. Inversion for small means, PTRS (Hoermann 1993)
  /// above 10; both consume only this generator's uniforms.
  std::uint64_t poisson(double mean);

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  Stream stream() const { return stream_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t cursor() const { return cursor_; }

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t cursor_;
  std::array<std::uint32_t, 4> block_{};
  std::uint64_t block_index_ = ~std::uint64_t{0};
};

}  // namespace mipt
