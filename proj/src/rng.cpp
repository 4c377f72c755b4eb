#include "saapde/rng.hpp"

#ifdef _MSC_VER
#include <intrin.h>
#endif

namespace saapde {

namespace {

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
#ifdef _MSC_VER
  lo = _umul128(a, b, &hi);
#else
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
#endif
}

// FNV-1a, used only to derive stream ids from tags.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t x, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xFF;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Philox4x64::Block Philox4x64::block(Block c, Key k) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, c[0], hi0, lo0);
    mulhilo(kMult1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    if (round < 9) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
  }
  return c;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key_{seed, stream}, counter_{0, 0, 0, 0}, buffered_(0) {}

std::uint64_t RngStream::stream_id(std::string_view purpose, std::uint64_t a,
                                   std::uint64_t b) {
  std::uint64_t h = fnv1a(purpose, 0xCBF29CE484222325ULL);
  h = fnv1a_u64(a, h);
  return h ^ b;
}

void RngStream::refill() {
  buffer_ = Philox4x64::block(counter_, key_);
  for (auto& word : counter_) {
    if (++word != 0) break;
  }
  buffered_ = 4;
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ == 0) refill();
  return buffer_[4 - buffered_--];
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

std::uint64_t RngStream::below(std::uint64_t m) {
  // Rejection sampling over the largest multiple of m below 2^64.
  const std::uint64_t limit = m * ((~std::uint64_t{0}) / m);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % m;
}

}  // namespace saapde
