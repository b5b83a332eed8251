#pragma once

// Seeded random streams.
//
// Every sampler takes an Rng explicitly. Streams for parallel work are derived
// from (master seed, task index, grid index) so that results do not depend on
// scheduling. The integer/real helpers are implemented here rather than with
// <random> distributions so output is identical across standard libraries.

#include <cstdint>
#include <random>
#include <vector>

namespace steinkit {

std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x5eed);

  /// Independent stream for worker/grid cell `index` of task `task`.
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t task, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Uniform random permutation of {1..size} revealed one entry at a time by a
/// sparse Fisher-Yates shuffle; drawing k entries costs O(k).
class LazyPermutation {
 public:
  explicit LazyPermutation(std::uint64_t size = 0);

  void reset(std::uint64_t size);
  std::uint64_t size() const { return size_; }
  std::uint64_t drawn() const { return drawn_; }
  /// Next entry sigma(drawn()+1); throws when exhausted.
  std::uint64_t next(Rng& rng);

 private:
  std::uint64_t value_at(std::uint64_t pos) const;
  void undo();

  std::uint64_t size_ = 0;
  std::uint64_t drawn_ = 0;
  std::vector<std::uint64_t> slot_;  // 0 means "untouched, holds pos + 1"
  std::vector<std::uint64_t> touched_;
};

/// Full uniform permutation of {1..size} in one-line notation.
std::vector<std::uint64_t> random_permutation(std::uint64_t size, Rng& rng);

}  // namespace steinkit
