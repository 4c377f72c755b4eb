#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace saapde {

/// Philox4x64-10 counter-based block generator (Salmon et al., Random123).
/// Stateless: every 256-bit counter maps to a 256-bit output block under a
/// 128-bit key, so streams can be split by key without coordination.
struct Philox4x64 {
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Block block(Block counter, Key key);
};

/// Buffered uniform generator over one (seed, stream) pair.
///
/// Distinct stream ids under the same seed give statistically independent
/// sequences; the counter advances per block, never per thread, so draws are
/// a pure function of (seed, stream, position).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Stream id for replication work: mixes a purpose tag with up to two
  /// indices (e.g. sample size and replication) and xors in the replication
  /// index so per-replication streams are derived from the base seed.
  static std::uint64_t stream_id(std::string_view purpose, std::uint64_t a = 0,
                                 std::uint64_t b = 0);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Unbiased uniform integer in [0, m), m >= 1.
  std::uint64_t below(std::uint64_t m);

 private:
  void refill();

  Philox4x64::Key key_;
  Philox4x64::Block counter_;
  Philox4x64::Block buffer_;
  int buffered_;
};

}  // namespace saapde
