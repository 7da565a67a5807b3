#include "specsde/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace specsde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> round_once(std::array<std::uint32_t, 4> c,
                                               std::array<std::uint32_t, 2> k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  counter = round_once(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round_once(counter, key);
  }
  return counter;
}

double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                 std::uint32_t driver, StreamPurpose purpose) {
  if (path > 0xFFFFFFFFull || step > 0xFFFFFFFFull) {
    throw std::invalid_argument("rng: path and step indices must fit in 32 bits");
  }
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path), driver,
      static_cast<std::uint32_t>(purpose)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto w = philox4x32(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  // 53-bit mantissa, strictly inside (0,1) so log() below is safe
  return static_cast<double>(a >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint32_t driver, StreamPurpose purpose) {
  if (path > 0xFFFFFFFFull || step > 0xFFFFFFFFull) {
    throw std::invalid_argument("rng: path and step indices must fit in 32 bits");
  }
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path), driver,
      static_cast<std::uint32_t>(purpose)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto w = philox4x32(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
  const double u1 = static_cast<double>(a >> 11) * 0x1.0p-53 + 0x1.0p-54;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53 + 0x1.0p-54;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace specsde
