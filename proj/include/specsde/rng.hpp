#pragma once

#include <array>
#include <cstdint>

namespace specsde {

// Philox4x32-10 counter-based generator. A (counter, key) pair maps to four
// independent 32-bit words; distinct counters never collide, so every
// (seed, path, step, driver) tuple owns its own statistically independent
// draw and paths can be generated in any order or in parallel.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Stream purposes keep noise increments and sampling draws in disjoint
// counter subspaces of the same seed.
enum class StreamPurpose : std::uint32_t {
  NoiseIncrement = 0,
  FieldSample = 1,
  InitialData = 2,
};

// One standard normal deputed to (seed, path, step, driver, purpose).
// path and step must fit in 32 bits (enforced).
double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint32_t driver, StreamPurpose purpose = StreamPurpose::NoiseIncrement);

// Uniform in (0,1), same addressing scheme.
double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                 std::uint32_t driver, StreamPurpose purpose);

}  // namespace specsde
