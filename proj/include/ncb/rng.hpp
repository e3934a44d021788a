#pragma once

// Counter-based splittable random streams.
//
// A stream is a 64-bit key plus a counter. Every draw is a pure function of
// (key, counter), so sibling streams never interact and any stream can be
// replayed by re-deriving its key. Keys are derived hierarchically:
//
//   RngStream::root(seed).derive(component).derive(replica).derive(t)
//
// The mixing function is the SplitMix64 finalizer; a SplitMix64 generator is
// exactly a counter-based generator with state = key + counter * gamma.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace ncb {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, used to turn component names into stable derivation tags.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  using result_type = std::uint64_t;

  static constexpr RngStream root(std::uint64_t seed) noexcept {
    return RngStream(detail::mix64(seed ^ 0x6a09e667f3bcc908ULL));
  }

  // Child stream; independent of the parent's counter.
  [[nodiscard]] constexpr RngStream derive(std::uint64_t tag) const noexcept {
    return RngStream(detail::mix64(key_ ^ detail::mix64(tag + detail::kGolden)));
  }
  [[nodiscard]] constexpr RngStream derive(std::string_view name) const noexcept {
    return derive(detail::fnv1a(name));
  }

  constexpr std::uint64_t next_u64() noexcept {
    return detail::mix64(key_ + (++counter_) * detail::kGolden);
  }
  constexpr result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1}; n must be positive. Rejection keeps it unbiased.
  constexpr std::uint64_t uniform_index(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  constexpr bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Inverse-CDF draw from a probability vector. Lowest index wins ties, and
  // rounding slack at the top of the CDF falls on the last positive entry.
  std::size_t categorical(std::span<const double> probs) noexcept {
    const double u = uniform01();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    return last_positive;
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

 private:
  explicit constexpr RngStream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Well-known component tags for the harness key hierarchy.
namespace stream_tag {
inline constexpr std::string_view kProcess = "process";
inline constexpr std::string_view kReward = "reward";
inline constexpr std::string_view kLearner = "learner";
}  // namespace stream_tag

}  // namespace ncb
