#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace switchsde::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).  Every draw
// is addressed by (key, counter), so ensembles are reproducible under any
// parallel schedule: a value depends only on its address, never on how many
// values other threads consumed.
struct Philox4x32 {
  static constexpr std::uint32_t kMult0 = 0xD2511F53u;
  static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

// Stream purposes keep independent randomness sources on disjoint keys.
enum : std::uint32_t {
  kPurposeBrownian = 1,
  kPurposeChain = 2,
  kPurposeSubsample = 3,
  kPurposeBootstrap = 4,
  kPurposeGeneric = 5,
};

inline std::uint64_t join_u64(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(hi) << 32 | lo;
}

// Uniform in (0, 1]: strictly positive so logs stay finite.
inline double unit_from_u64(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline std::array<std::uint32_t, 2> make_key(std::uint64_t seed, std::uint32_t purpose) {
  return {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32) ^ (purpose * 0x632BE5ABu)};
}

// One standard normal addressed by (seed, purpose, stream, step, coordinate).
inline double normal_at(std::uint64_t seed, std::uint32_t purpose, std::uint64_t stream,
                        std::uint64_t step, std::uint32_t coordinate) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
      static_cast<std::uint32_t>(stream) ^ (coordinate * 0x9E3779B9u),
      static_cast<std::uint32_t>(stream >> 32)};
  const auto words = Philox4x32::block(ctr, make_key(seed, purpose));
  const double u1 = unit_from_u64(join_u64(words[0], words[1]));
  const double u2 = unit_from_u64(join_u64(words[2], words[3]));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Sequential stream of draws under one (seed, purpose, stream) address.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t purpose, std::uint64_t stream = 0)
      : key_(make_key(seed, purpose)),
        tag_lo_(static_cast<std::uint32_t>(stream)),
        tag_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint64_t next_u64() {
    if (!have_spare_) {
      const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(index_),
                                                static_cast<std::uint32_t>(index_ >> 32),
                                                tag_lo_, tag_hi_};
      const auto words = Philox4x32::block(ctr, key_);
      ++index_;
      spare_ = join_u64(words[2], words[3]);
      have_spare_ = true;
      return join_u64(words[0], words[1]);
    }
    have_spare_ = false;
    return spare_;
  }

  double next_unit() { return unit_from_u64(next_u64()); }

  double next_exponential(double rate) { return -std::log(next_unit()) / rate; }

  double next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Index in [0, n) with probability weights[i] / sum(weights).
  template <class Weights>
  int next_discrete(const Weights& weights, int n, double total) {
    const double u = next_unit() * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += weights(i);
      if (u <= acc) return i;
    }
    return n - 1;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t tag_lo_;
  std::uint32_t tag_hi_;
  std::uint64_t index_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace switchsde::rng
