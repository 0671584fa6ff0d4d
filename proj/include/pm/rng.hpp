#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace pm {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit
/// counter and 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

enum class Purpose : std::uint32_t {
  Init = 1,
  Mh = 2,
  Swap = 3,
  Schedule = 4,
  Test = 5,
};

struct StreamId {
  Purpose purpose = Purpose::Test;
  std::uint32_t index = 0;
};

/// Counter-based generator. The key is derived from the master seed, the upper
/// counter words hold the stream id, and the lower 64 bits count blocks, so
/// two streams with different ids never share a block.
class Rng {
 public:
  using result_type = std::uint32_t;

  Rng(std::uint64_t seed, StreamId id);
  explicit Rng(std::uint64_t seed) : Rng(seed, StreamId{}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); safe to take the log of.
  double uniform_open();
  /// Standard normal via Box-Muller.
  double normal();

  std::uint64_t blocks_consumed() const { return block_; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint32_t stream_hi_ = 0;
  std::uint32_t stream_lo_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pm
