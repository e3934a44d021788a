#pragma once

// Exponential time-scale grids.
//
// At scale i the boundaries are T_i^k = floor(2^u * (1 + v * 2^-i)) with
// k = u * 2^i + v and 0 <= v < 2^i, so each dyadic block [2^u, 2^(u+1)) is cut
// into 2^i periods. Small u at large i makes the floor collapse consecutive
// boundaries; such periods are empty and period_of() picks the largest k whose
// boundary is <= t, so the periods still tile [1, inf) exactly.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncb/core.hpp"

namespace ncb {

inline constexpr unsigned kMaxScale = 57;  // keeps k = u * 2^i + v in 64 bits

namespace detail {
inline void check_scale(unsigned i) {
  if (i > kMaxScale) throw OverflowError("scale index " + std::to_string(i) + " too large");
}
}  // namespace detail

// T_i^k.
inline Time t_scale(unsigned i, std::uint64_t k) {
  detail::check_scale(i);
  const std::uint64_t u = k >> i;
  const std::uint64_t v = k & ((std::uint64_t{1} << i) - 1);
  if (u > 63) throw OverflowError("T_i^k exceeds 64-bit time range");
  const Time base = Time{1} << u;
  return u >= i ? base + (v << (u - i)) : base + (v >> (i - u));
}

// Largest k with T_i^k <= t.
inline std::uint64_t period_of(Time t, unsigned i) {
  if (t == 0) throw ContractError("period_of requires t >= 1");
  detail::check_scale(i);
  const unsigned u = static_cast<unsigned>(std::bit_width(t)) - 1;
  const Time d = t - (Time{1} << u);
  std::uint64_t v = 0;
  if (u >= i) {
    v = d >> (u - i);
  } else {
    // boundary offset is v >> (i - u); the largest v with offset <= d
    v = ((d + 1) << (i - u)) - 1;
  }
  return (std::uint64_t{u} << i) + v;
}

// First time of the scale-i period containing t.
inline Time period_start(Time t, unsigned i) { return t_scale(i, period_of(t, i)); }

// floor(log2 t).
inline unsigned stage_of(Time t) {
  if (t == 0) throw ContractError("stage_of requires t >= 1");
  return static_cast<unsigned>(std::bit_width(t)) - 1;
}

// Direct definition: no earlier time in t's scale-i period carries the same
// context. contexts[0] is X_1.
inline bool in_first_appearance_set(Time t, unsigned i, std::span<const ContextPoint> contexts) {
  if (t == 0 || contexts.size() < t) throw ContractError("history shorter than t");
  const Time start = period_start(t, i);
  const std::uint64_t uid = contexts[t - 1].uid;
  for (Time s = start; s < t; ++s) {
    if (contexts[s - 1].uid == uid) return false;
  }
  return true;
}

// Incremental membership in T^0 ... T^max_scale. One last-seen map serves all
// scales: t is in T^i iff the previous visit of X_t precedes t's period start.
class FirstAppearanceTracker {
 public:
  explicit FirstAppearanceTracker(unsigned max_scale) : max_scale_(max_scale) {
    detail::check_scale(max_scale);
  }

  // Feed X_t for t = 1, 2, ...; bit i of the result is set iff t is in T^i.
  std::uint64_t observe(const ContextPoint& x) {
    ++t_;
    auto [it, inserted] = last_seen_.try_emplace(x.uid, t_);
    const Time prev = inserted ? 0 : it->second;
    it->second = t_;
    std::uint64_t mask = 0;
    for (unsigned i = 0; i <= max_scale_; ++i) {
      if (prev == 0 || prev < period_start(t_, i)) mask |= std::uint64_t{1} << i;
    }
    return mask;
  }

  [[nodiscard]] Time t() const noexcept { return t_; }

 private:
  unsigned max_scale_;
  Time t_ = 0;
  std::unordered_map<std::uint64_t, Time> last_seen_;
};

// Phase thresholds T_i = 2^u(i) used by the C5 learner.
//
// Desk mode only needs u(0) = 0 and strict monotonicity. Paper mode also
// demands u(i) >= 2i and u(i) >= eta_i * 2^(i+5) with
// eta_i = sqrt(8 ln(i+1) / 2^i); under those constants phase 1 starts near
// 2^107, far beyond any 64-bit horizon.
class PhaseSchedule {
 public:
  enum class Mode { kDesk, kPaper };

  // u(i) = step * i for i <= max_phase.
  static PhaseSchedule linear(std::uint64_t step, std::uint64_t max_phase = 63) {
    if (step == 0) throw ContractError("linear schedule step must be positive");
    PhaseSchedule s(Mode::kDesk);
    for (std::uint64_t i = 0; i <= max_phase && i * step <= 63; ++i) s.u_.push_back(i * step);
    return s;
  }

  // Explicit exponents; phases past the list are never reached.
  static PhaseSchedule explicit_exponents(std::vector<std::uint64_t> u, Mode mode = Mode::kDesk) {
    PhaseSchedule s(mode);
    s.u_ = std::move(u);
    s.validate();
    return s;
  }

  // Smallest schedule meeting the paper-mode constraints for phases 0..max_phase.
  static PhaseSchedule paper(unsigned max_phase) {
    std::vector<std::uint64_t> u{0};
    for (unsigned i = 1; i <= max_phase; ++i) {
      const auto need = static_cast<std::uint64_t>(std::ceil(eta(i) * std::ldexp(1.0, static_cast<int>(i) + 5)));
      u.push_back(std::max({std::uint64_t{2} * i, need, u.back() + 1}));
    }
    return explicit_exponents(std::move(u), Mode::kPaper);
  }

  // Hedge learning rate for 2^i steps.
  static double eta(unsigned i) {
    return std::sqrt(8.0 * std::log(static_cast<double>(i) + 1.0) / std::ldexp(1.0, static_cast<int>(i)));
  }

  void validate() const {
    if (u_.empty() || u_.front() != 0) throw ContractError("phase schedule must start with u(0) = 0");
    for (std::size_t i = 1; i < u_.size(); ++i) {
      if (u_[i] <= u_[i - 1]) throw ContractError("phase schedule must be strictly increasing");
      if (mode_ == Mode::kPaper) {
        if (u_[i] < 2 * i) throw ContractError("paper schedule requires u(i) >= 2i");
        const double need = eta(static_cast<unsigned>(i)) * std::ldexp(1.0, static_cast<int>(i) + 5);
        if (static_cast<double>(u_[i]) < need) {
          throw ContractError("paper schedule requires u(i) >= eta_i * 2^(i+5)");
        }
      }
    }
  }

  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  [[nodiscard]] std::span<const std::uint64_t> exponents() const noexcept { return u_; }

  // u(i), or nullopt when phase i is never reached.
  [[nodiscard]] std::optional<std::uint64_t> u(std::size_t i) const {
    if (i >= u_.size()) return std::nullopt;
    return u_[i];
  }

  // Largest i with 2^u(i) <= t.
  [[nodiscard]] unsigned phase(Time t) const {
    const std::uint64_t l = stage_of(t);
    const auto it = std::upper_bound(u_.begin(), u_.end(), l);
    return static_cast<unsigned>(std::distance(u_.begin(), it) - 1);
  }

  // True iff t >= 2^u(i); false when phase i is never reached.
  [[nodiscard]] bool reached(std::size_t i, Time t) const {
    const auto ui = u(i);
    return ui && *ui <= 63 && t >= (Time{1} << *ui);
  }

 private:
  explicit PhaseSchedule(Mode mode) : mode_(mode) {}

  Mode mode_;
  std::vector<std::uint64_t> u_;
};

// Position of t in the C5 learner's clock.
struct Alg1Clock {
  unsigned phase = 0;        // i
  unsigned stage = 0;        // l = floor(log2 t)
  std::uint64_t period = 0;  // k in [0, 2^i)
  Time period_begin = 0;     // T_i^(l 2^i + k)
  Time period_end = 0;       // T_i^(l 2^i + k + 1), exclusive
};

inline Alg1Clock alg1_clock(Time t, const PhaseSchedule& sched) {
  Alg1Clock c;
  c.phase = sched.phase(t);
  c.stage = stage_of(t);
  const std::uint64_t k = period_of(t, c.phase);
  c.period = k - (std::uint64_t{c.stage} << c.phase);
  c.period_begin = t_scale(c.phase, k);
  c.period_end = t_scale(c.phase, k + 1);
  return c;
}

inline std::uint64_t alg1_period(Time t, const PhaseSchedule& sched) {
  return alg1_clock(t, sched).period;
}

// floor(log4 count) for count >= 1.
inline unsigned category_of_count(std::uint64_t count) {
  if (count == 0) throw ContractError("occurrence count must be >= 1");
  return (static_cast<unsigned>(std::bit_width(count)) - 1) / 2;
}

// Occurrence counts of contexts within their current C5 period. The map is
// rebuilt whenever the period changes.
class CategoryTracker {
 public:
  explicit CategoryTracker(PhaseSchedule sched) : sched_(std::move(sched)) {}

  struct Entry {
    Alg1Clock clock;
    std::uint64_t count = 0;
    unsigned category = 0;
  };

  // Feed X_t for t = 1, 2, ...
  Entry observe(const ContextPoint& x) {
    ++t_;
    Entry e;
    e.clock = alg1_clock(t_, sched_);
    if (e.clock.period_begin != current_begin_) {
      counts_.clear();
      current_begin_ = e.clock.period_begin;
    }
    e.count = ++counts_[x.uid];
    e.category = category_of_count(e.count);
    return e;
  }

  [[nodiscard]] Time t() const noexcept { return t_; }
  [[nodiscard]] const PhaseSchedule& schedule() const noexcept { return sched_; }

 private:
  PhaseSchedule sched_;
  Time t_ = 0;
  Time current_begin_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

}  // namespace ncb
