#include "steinkit/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace steinkit {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
  engine_.seed(seq);
}

Rng Rng::for_stream(std::uint64_t master_seed, std::uint64_t task, std::uint64_t index) {
  std::uint64_t s = master_seed;
  std::uint64_t mixed = splitmix64(s);
  s = mixed ^ (task * 0xd1b54a32d192ed03ULL);
  mixed = splitmix64(s);
  s = mixed ^ (index * 0x8cb92ba72f3d8dd7ULL);
  return Rng(splitmix64(s));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below needs a positive bound");
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // Box-Muller, one variate per call.
  double u = uniform01();
  while (u <= 0.0) u = uniform01();
  const double v = uniform01();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

LazyPermutation::LazyPermutation(std::uint64_t size) { reset(size); }

void LazyPermutation::undo() {
  for (auto pos : touched_) slot_[pos] = 0;
  touched_.clear();
}

void LazyPermutation::reset(std::uint64_t size) {
  if (size != size_) {
    slot_.assign(size, 0);
    touched_.clear();
    size_ = size;
  } else {
    undo();
  }
  drawn_ = 0;
}

std::uint64_t LazyPermutation::value_at(std::uint64_t pos) const {
  return slot_[pos] == 0 ? pos + 1 : slot_[pos];
}

std::uint64_t LazyPermutation::next(Rng& rng) {
  if (drawn_ >= size_) throw std::out_of_range("lazy permutation exhausted");
  const std::uint64_t j = drawn_ + rng.below(size_ - drawn_);
  const std::uint64_t chosen = value_at(j);
  const std::uint64_t here = value_at(drawn_);
  if (slot_[j] == 0) touched_.push_back(j);
  slot_[j] = here;
  if (slot_[drawn_] == 0) touched_.push_back(drawn_);
  slot_[drawn_] = chosen;
  ++drawn_;
  return chosen;
}

std::vector<std::uint64_t> random_permutation(std::uint64_t size, Rng& rng) {
  std::vector<std::uint64_t> perm(size);
  std::iota(perm.begin(), perm.end(), std::uint64_t{1});
  for (std::uint64_t i = 0; i + 1 < size; ++i) std::swap(perm[i], perm[i + rng.below(size - i)]);
  return perm;
}

}  // namespace steinkit
