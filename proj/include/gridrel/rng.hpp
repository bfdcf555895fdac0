#pragma once

#include <cstdint>

namespace gridrel {

// 64-bit finalizer with full avalanche; every output bit depends on every
// input bit. Used both as the SplitMix64 state scrambler and to derive
// independent substreams from (seed, tag, index) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Deterministic, allocation-free PRNG. Cheap enough to seed one instance per
// simulated entity, which keeps every sample a pure function of its seed and
// makes results independent of worker count.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as the argument of -log(r).
  double uniform_open() noexcept { return 1.0 - uniform01(); }

 private:
  std::uint64_t state_;
};

// Substream derivation: statistically independent seeds for nested entities
// (scenario -> batch -> sample -> customer). Chained finalizer applications
// with odd tweak constants so distinct tuples land in distinct streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (tag + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
  return derive_seed(derive_seed(seed, tag), index);
}

// Stream tags. Arbitrary odd constants; fixed so any (seed, purpose) pair maps
// to a stable substream across releases.
namespace stream {
constexpr std::uint64_t kScenario = 0xA5C1'19D3ull;
constexpr std::uint64_t kBatchCloud = 0xB7E1'52C7ull;
constexpr std::uint64_t kStrata = 0xC4D9'0A11ull;
constexpr std::uint64_t kSample = 0xC9A3'5B67ull;
constexpr std::uint64_t kLoadPoint = 0xD1F3'66E9ull;
constexpr std::uint64_t kCustomer = 0xE0B5'7D25ull;
constexpr std::uint64_t kResidenceCmd = 0xF2A7'431Bull;
constexpr std::uint64_t kComponents = 0x3C4D'5E6Full;
constexpr std::uint64_t kProfileDay = 0x1A2B'3C4Dull;
constexpr std::uint64_t kProfileStep = 0x2B3C'4D5Full;
}  // namespace stream

}  // namespace gridrel
