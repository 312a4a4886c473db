#pragma once

#include <cstdint>
#include <random>

namespace phaselab {

// Independent, reproducible stream for (seed, stream tag).
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Stream tags. Keeping them in one place avoids accidental reuse.
namespace streams {
inline constexpr std::uint64_t backbone = 0x6261636b;
inline constexpr std::uint64_t adapter = 0x61646170;
inline constexpr std::uint64_t head = 0x68656164;
inline constexpr std::uint64_t mixing = 0x6d697869;
inline constexpr std::uint64_t test_set = 0x74657374;
inline constexpr std::uint64_t train_set = 0x74726169;
inline constexpr std::uint64_t shuffle = 0x73687566;
}  // namespace streams

}  // namespace phaselab
