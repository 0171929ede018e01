#pragma once

// Seed derivation and a small portable random stream.
//
// Every random decision in the library draws from an Rng whose seed is a pure
// function of the master seed and a path of identifiers:
//
//   derive_seed(master, a, b, c) = mix(mix(mix(master, a), b), c)
//   mix(s, id)                   = splitmix64(s ^ splitmix64(id + golden))
//
// String identifiers (dataset and model names) enter the path through their
// 64-bit FNV-1a hash. Because no stream is shared between jobs, results do not
// depend on the order in which folds, trees, or models are fitted.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace stackgen {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline constexpr std::uint64_t seed_id(std::uint64_t id) noexcept { return id; }
inline constexpr std::uint64_t seed_id(std::string_view id) noexcept { return fnv1a(id); }

inline constexpr std::uint64_t mix(std::uint64_t state, std::uint64_t id) noexcept {
  return splitmix64(state ^ splitmix64(id + 0x9e3779b97f4a7c15ULL));
}

}  // namespace detail

template <typename... Ids>
constexpr std::uint64_t derive_seed(std::uint64_t master, const Ids&... ids) noexcept {
  std::uint64_t state = master;
  ((state = detail::mix(state, detail::seed_id(ids))), ...);
  return state;
}

// Distribution helpers are written out here rather than taken from <random>
// because the standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % n;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stackgen
