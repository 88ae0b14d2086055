#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bsde {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). A draw is
// a pure function of (key, counter), which gives reproducible parallel
// streams without shared state.
namespace philox {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0,
                       std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> block(std::uint64_t key,
                                          std::array<std::uint32_t, 4> ctr) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, k0, k1);
    k0 += kW0;
    k1 += kW1;
  }
  return ctr;
}

}  // namespace philox

// Stream tags keep the main ensemble, nested inner continuations and any
// auxiliary draws on disjoint counters.
constexpr std::uint32_t kStreamEnsemble = 0u;
constexpr std::uint32_t kStreamNestedBase = 0x80000000u;

inline double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
  // 53 significant bits mapped into the open interval (0, 1).
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// One standard normal per (seed, path, step, inner, stream) via Box-Muller.
inline double normal_draw(std::uint64_t seed, std::uint32_t path,
                          std::uint32_t step, std::uint32_t inner,
                          std::uint32_t stream) {
  const auto out = philox::block(seed, {path, step, inner, stream});
  const double u1 = uniform_from_bits(out[0], out[1]);
  const double u2 = uniform_from_bits(out[2], out[3]);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace bsde
