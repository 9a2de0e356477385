#pragma once

#include <cmath>
#include <cstdint>

namespace curator::rng {

// Keyed counter-based generator. Every random quantity in the project is a
// pure function of (seed, stream, k1..k4), so regenerating any value never
// depends on how many draws happened before it. Streams partition consumers
// so two subsystems never share a draw.
enum Stream : std::uint64_t {
  kPoolFeature = 1,   // (kind, class index, sample index, coordinate)
  kProposal = 2,      // (sample id, proposal index, field)
  kVote = 3,          // (round, sample id, annotator index)
  kSelect = 4,        // (pick index)
  kRound = 5,         // (round) -> per-round strategy seed
  kEval = 6,          // evaluation-set feature stream
  kTest = 7,          // test-local generators
};

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t draw(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                          std::uint64_t k3 = 0, std::uint64_t k4 = 0) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (stream + kGolden));
  h = mix64(h ^ (k1 + kGolden));
  h = mix64(h ^ (k2 + kGolden));
  h = mix64(h ^ (k3 + kGolden));
  h = mix64(h ^ (k4 + kGolden));
  return h;
}

// Maps 64 random bits onto [0, 1).
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                      std::uint64_t k3 = 0, std::uint64_t k4 = 0) {
  return to_unit(draw(seed, stream, k1, k2, k3, k4));
}

// Standard normal via Box-Muller. Coordinate t consumes key slots 2t and
// 2t+1 so each coordinate of a sample is its own pair of counter draws.
inline double gaussian(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t k1, std::uint64_t k2, std::uint64_t k3,
                       std::uint64_t coord) {
  const double u1 =
      1.0 - to_unit(draw(seed, stream, k1, k2, k3, 2 * coord));  // (0, 1]
  const double u2 = to_unit(draw(seed, stream, k1, k2, k3, 2 * coord + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace curator::rng
