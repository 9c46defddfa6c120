#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>

namespace hamcycle {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the tag bytes.
constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

/// Splittable seed source. Every stream is a pure function of
/// (master seed, tag, index), so two sources with equal master seeds hand
/// out identical streams and differently tagged streams do not overlap in
/// any practical sense.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t master_seed) noexcept : seed_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return seed_; }

  std::uint64_t derive(std::string_view tag, std::uint64_t index = 0) const noexcept {
    return mix64(mix64(seed_ ^ hash_tag(tag)) ^ mix64(index + 0x632be59bd9b4e019ULL));
  }

  Rng stream(std::string_view tag, std::uint64_t index = 0) const {
    return Rng(derive(tag, index));
  }

  /// Child source, e.g. one per trial.
  RandomSource split(std::string_view tag, std::uint64_t index = 0) const noexcept {
    return RandomSource(derive(tag, index));
  }

 private:
  std::uint64_t seed_;
};

template <class URBG>
std::size_t uniform_index(URBG& rng, std::size_t count) {
  std::uniform_int_distribution<std::size_t> dist(0, count - 1);
  return dist(rng);
}

/// Single-slot uniform reservoir: after k offers each offered item is the
/// pick with probability 1/k.
template <class T>
class Reservoir {
 public:
  template <class URBG>
  void offer(T item, URBG& rng) {
    ++seen_;
    if (seen_ == 1 || uniform_index(rng, seen_) == 0) pick_ = std::move(item);
  }

  std::uint64_t seen() const noexcept { return seen_; }
  bool empty() const noexcept { return seen_ == 0; }
  const std::optional<T>& pick() const noexcept { return pick_; }
  std::optional<T> take() noexcept {
    seen_ = 0;
    return std::exchange(pick_, std::nullopt);
  }

 private:
  std::uint64_t seen_ = 0;
  std::optional<T> pick_;
};

}  // namespace hamcycle
