#pragma once

// Seed hierarchy. Every stochastic code path draws from an engine seeded by
// derive_seed(global seed, stream, indices...), so results never depend on
// evaluation order or on how work is split across threads.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hyperx {

using Engine = std::mt19937_64;

/// Named substreams of the global seed.
enum class Stream : std::uint64_t {
  structure = 1,
  class_means = 2,
  feature_noise = 3,
  labels = 4,
  splits = 5,
  init = 6,
  tie_break = 7,
  dropout = 8,
  hypergcn_signal = 9,
  wl_trial = 10,
  repeat = 11,
  bench = 12,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::initializer_list<std::uint64_t> path = {}) noexcept {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(stream)));
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632BE59BD9B4E019ULL));
  return h;
}

/// Small-state generator for substreams that are created in bulk (one per
/// hyperedge per epoch); construction is a single assignment.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline Engine make_engine(std::uint64_t seed, Stream stream,
                          std::initializer_list<std::uint64_t> path = {}) {
  return Engine(derive_seed(seed, stream, path));
}

}  // namespace hyperx
