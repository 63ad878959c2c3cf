#pragma once

// Counter-based Philox4x32-10 generator. A (key, counter) pair maps to four
// 32-bit words with no hidden state, so a stream can be addressed by path
// index and draw number and reproduced independently of thread layout.

#include <array>
#include <cstdint>

namespace hpfrac {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const {
    Key key = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  /// Two uniforms in (0, 1) with 52 random bits each for block `block` of
  /// stream `stream`.
  std::array<double, 2> uniforms(std::uint64_t stream, std::uint64_t block) const {
    const Counter w = (*this)({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                               static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)});
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    // 52 bits plus a half step keeps both ends open in binary64.
    const double bits = static_cast<double>(hi >> 6) * 67108864.0 + static_cast<double>(lo >> 6);
    return (bits + 0.5) / 4503599627370496.0;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  Key key_;
};

}  // namespace hpfrac
