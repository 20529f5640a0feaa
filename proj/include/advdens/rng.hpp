#pragma once

#include <array>
#include <cstdint>

namespace advdens {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The stream is a pure function of (key, stream id, counter), so the same
/// seed produces the same numbers on every platform and any block of the
/// stream can be computed without touching the others.
class Philox {
public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Raw 4x32 block for a given counter value. Does not advance the stream.
  std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in the open interval (0, 1).
  double uniform_open();

  /// Standard normal via Box-Muller.
  double normal();

  std::uint64_t counter() const { return counter_; }
  std::uint64_t stream() const { return stream_; }

private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Derive an independent 64-bit seed for a (seed, index) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace advdens
