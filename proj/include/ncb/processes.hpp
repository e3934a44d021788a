#pragma once

// Context processes on [0, 1].
//
// Every generator is an iterator over t = 1, 2, ... A fresh point gets the
// time of its first appearance as uid, and its coordinate is a pure function
// of (process stream, uid); duplicates copy the uid and therefore the
// coordinate. Nothing is stored per point, so horizons of 10^7 and beyond are
// cheap. The idle symbol is idle_context() (coordinate 0, uid 0).

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ncb/core.hpp"
#include "ncb/rng.hpp"

namespace ncb {

// Ground truth attached to each emitted step. Fields a construction does not
// use stay at -1.
struct ProcessAnnotation {
  std::int64_t phase = -1;  // k, l, or outer period i depending on the construction
  std::int64_t cls = -1;    // class index i (or p) of the phase
  std::int64_t copy = -1;   // 0 for the fresh draw, q for the q-th repetition
  bool fresh = false;
  bool idle = false;
};

class ContextProcess {
 public:
  virtual ~ContextProcess() = default;

  ContextPoint next() {
    ++t_;
    ann_ = ProcessAnnotation{};
    return emit(t_, ann_);
  }

  [[nodiscard]] Time t() const noexcept { return t_; }
  // Annotation of the last emitted step.
  [[nodiscard]] const ProcessAnnotation& annotation() const noexcept { return ann_; }
  [[nodiscard]] virtual std::string kind() const = 0;

 protected:
  virtual ContextPoint emit(Time t, ProcessAnnotation& ann) = 0;

 private:
  Time t_ = 0;
  ProcessAnnotation ann_;
};

// Carrier A_i = [2^-i, 2^-i+1) for i >= 1.
inline double carrier_point(unsigned i, double u) { return std::ldexp(1.0 + u, -static_cast<int>(i)); }

inline bool in_carrier(unsigned i, double x) {
  return x >= std::ldexp(1.0, -static_cast<int>(i)) && x < std::ldexp(1.0, 1 - static_cast<int>(i));
}

// A_p(l) = union over 0 <= j < 2^l of [j 2^-l, j 2^-l + 2^-(p+l)), half-open.
inline bool in_comb(unsigned p, unsigned l, double x) {
  if (x < 0.0 || x >= 1.0) return false;
  const auto cell = static_cast<std::uint64_t>(std::floor(std::ldexp(x, static_cast<int>(p + l))));
  return (cell & ((std::uint64_t{1} << p) - 1)) == 0;
}

// S_i = {k >= 1 : k = 2^(i-1) mod 2^i}; the class of k is 1 + (trailing zeros of k).
inline unsigned residue_class(std::uint64_t k) {
  if (k == 0) throw ContractError("residue classes start at 1");
  return 1 + static_cast<unsigned>(std::countr_zero(k));
}

// n_i = 2^floor(log2 i).
inline std::uint64_t class_multiplicity(unsigned i) {
  if (i == 0) throw ContractError("class index starts at 1");
  return std::uint64_t{1} << (std::bit_width(i) - 1);
}

// ---------------------------------------------------------------------------

class IidUniformProcess final : public ContextProcess {
 public:
  explicit IidUniformProcess(RngStream rng) : rng_(rng) {}
  [[nodiscard]] std::string kind() const override { return "iid_uniform"; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    ann.fresh = true;
    auto r = rng_.derive(t);
    return {r.uniform01(), t};
  }

 private:
  RngStream rng_;
};

// i.i.d. draws from a finite set of points; uid = 1 + support index.
class FiniteSupportProcess final : public ContextProcess {
 public:
  FiniteSupportProcess(std::vector<double> points, std::vector<double> weights, RngStream rng)
      : points_(std::move(points)), probs_(std::move(weights)), rng_(rng) {
    if (points_.empty() || points_.size() != probs_.size()) {
      throw ContractError("finite support needs matching points and weights");
    }
    double z = 0.0;
    for (std::size_t j = 0; j < probs_.size(); ++j) {
      if (!(probs_[j] >= 0.0) || points_[j] < 0.0 || points_[j] > 1.0) throw ContractError("invalid support entry");
      z += probs_[j];
    }
    if (!(z > 0.0)) throw ContractError("support weights sum to zero");
    for (double& p : probs_) p /= z;
  }
  [[nodiscard]] std::string kind() const override { return "finite_support_iid"; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    auto r = rng_.derive(t);
    const std::size_t j = r.categorical(probs_);
    seen_.resize(points_.size(), false);
    ann.fresh = !seen_[j];
    seen_[j] = true;
    return {points_[j], j + 1};
  }

 private:
  std::vector<double> points_;
  std::vector<double> probs_;
  RngStream rng_;
  std::vector<bool> seen_;
};

// Number of distinct points visited by time T.
using DistinctSchedule = std::function<std::uint64_t(Time)>;

inline DistinctSchedule sqrt_schedule() {
  return [](Time t) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(t)));
    while (r * r < t) ++r;
    while (r > 0 && (r - 1) * (r - 1) >= t) --r;
    return r;
  };
}

inline DistinctSchedule capped_schedule(std::uint64_t n) {
  if (n == 0) throw ContractError("schedule cap must be positive");
  return [n](Time t) { return std::min<std::uint64_t>(t, n); };
}

// Visits exactly D(T) distinct points by time T. A new point appears whenever
// D increments; otherwise the existing points are revisited round-robin.
class DeterministicC2Process final : public ContextProcess {
 public:
  DeterministicC2Process(DistinctSchedule schedule, RngStream rng) : schedule_(std::move(schedule)), rng_(rng) {}
  [[nodiscard]] std::string kind() const override { return "deterministic_c2"; }
  [[nodiscard]] std::uint64_t distinct() const noexcept { return uids_.size(); }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    const std::uint64_t d = schedule_(t);
    if (d > t) throw ContractError("distinct schedule exceeds the number of steps");
    if (d < uids_.size() || d > uids_.size() + 1 || d == 0) {
      throw ContractError("distinct schedule must start at 1 and grow by at most one per step");
    }
    std::uint64_t uid = 0;
    if (d > uids_.size()) {
      uids_.push_back(t);
      uid = t;
      ann.fresh = true;
    } else {
      uid = uids_[cursor_ % uids_.size()];
      ++cursor_;
    }
    auto r = rng_.derive(uid);
    return {r.uniform01(), uid};
  }

 private:
  DistinctSchedule schedule_;
  RngStream rng_;
  std::vector<std::uint64_t> uids_;
  std::uint64_t cursor_ = 0;
};

// Duplication blocks. With eps = 2^-k and T^i = (1+i)! T0 / eps, outer period
// i occupies [T^i, T^(i+1)): its first k_i = (1+i)! T0 steps are fresh uniform
// draws, repeated verbatim 1/eps times to fill [T^i, 2 T^i), followed by the
// idle symbol on [2 T^i, T^(i+1)). Times before T^0 and after the last period
// are idle.
class DupBlockProcess final : public ContextProcess {
 public:
  struct Params {
    unsigned eps_exponent = 3;
    std::uint64_t base_time = 1000;
    unsigned periods = 1;
    std::uint64_t block_cap = std::uint64_t{1} << 26;
  };

  DupBlockProcess(Params params, RngStream rng) : params_(params), rng_(rng) {
    if (params.eps_exponent == 0 || params.eps_exponent > 20) throw ContractError("eps exponent must be in 1..20");
    if (params.base_time == 0 || params.periods == 0) throw ContractError("dup block needs T0 >= 1 and periods >= 1");
    std::uint64_t fact = 1;
    for (unsigned i = 0; i <= params.periods; ++i) {
      fact *= (i + 1);
      const std::uint64_t k = fact * params.base_time;
      if (k / params.base_time != fact || (k << params.eps_exponent) >> params.eps_exponent != k) {
        throw OverflowError("dup block schedule exceeds 64-bit time");
      }
      starts_.push_back(k << params.eps_exponent);
      blocks_.push_back(k);
    }
    for (unsigned i = 0; i < params.periods; ++i) {
      if (blocks_[i] > params.block_cap) throw ContractError("dup block size exceeds the configured cap");
    }
  }

  [[nodiscard]] std::string kind() const override { return "dup_block"; }
  [[nodiscard]] std::uint64_t repetitions() const noexcept { return std::uint64_t{1} << params_.eps_exponent; }
  // T^i for i = 0 .. periods (the last entry closes the final period).
  [[nodiscard]] Time period_start(unsigned i) const { return starts_.at(i); }
  // k_i.
  [[nodiscard]] std::uint64_t block_size(unsigned i) const { return blocks_.at(i); }
  [[nodiscard]] unsigned periods() const noexcept { return params_.periods; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    for (unsigned i = 0; i < params_.periods; ++i) {
      const Time s = starts_[i];
      if (t < s || t >= starts_[i + 1]) continue;
      ann.phase = i;
      if (t >= 2 * s) break;
      const std::uint64_t j = t - s;
      const std::uint64_t pos = j % blocks_[i];
      ann.copy = static_cast<std::int64_t>(j / blocks_[i]);
      ann.fresh = ann.copy == 0;
      const std::uint64_t uid = s + pos;
      auto r = rng_.derive(uid);
      return {r.uniform01(), uid};
    }
    ann.idle = true;
    return idle_context();
  }

 private:
  Params params_;
  RngStream rng_;
  std::vector<Time> starts_;
  std::vector<std::uint64_t> blocks_;
};

// T_k = 2^k k!, exact for k <= 17.
inline Time factorial_grid(unsigned k) {
  if (k > 17) throw OverflowError("2^k k! exceeds 64-bit time for k > 17");
  Time v = 1;
  for (unsigned j = 1; j <= k; ++j) v *= 2 * Time{j};
  return v;
}

// Process in C2 but not C4. For k in S_i the window [T_k, 2 T_k) cycles
// through a block of T_k / n_i fresh draws on A_i, so each draw appears n_i
// times; all other times are idle.
class C2NotC4Process final : public ContextProcess {
 public:
  explicit C2NotC4Process(RngStream rng) : rng_(rng) {}
  [[nodiscard]] std::string kind() const override { return "c2_not_c4"; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    while (k_ + 1 <= 17 && factorial_grid(k_ + 1) <= t) ++k_;
    if (k_ == 0 || t >= 2 * factorial_grid(k_)) {
      ann.idle = true;
      return idle_context();
    }
    const Time tk = factorial_grid(k_);
    const unsigned i = residue_class(k_);
    const std::uint64_t n = class_multiplicity(i);
    const std::uint64_t block = tk / n;
    const std::uint64_t j = t - tk;
    ann.phase = k_;
    ann.cls = i;
    ann.copy = static_cast<std::int64_t>(j / block);
    ann.fresh = ann.copy == 0;
    const std::uint64_t uid = tk + j % block;
    auto r = rng_.derive(uid);
    return {carrier_point(i, r.uniform01()), uid};
  }

 private:
  RngStream rng_;
  unsigned k_ = 0;
};

// Process in C4 but not C6. Phase l >= 1 is [2^l, 2^(l+1)) with l in S_p; its
// first 2^(l-p) steps are fresh uniform draws on A_p(l) and the remaining
// steps copy X_t' with t' = t mod 2^(l-p). X_1 is the idle symbol.
class C4NotC6Process final : public ContextProcess {
 public:
  explicit C4NotC6Process(RngStream rng) : rng_(rng) {}
  [[nodiscard]] std::string kind() const override { return "c4_not_c6"; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    const auto l = static_cast<unsigned>(std::bit_width(t)) - 1;
    if (l == 0) {
      ann.idle = true;
      return idle_context();
    }
    if (l > 40) throw OverflowError("c4_not_c6 supports t < 2^41");
    const unsigned p = residue_class(l);
    const Time start = Time{1} << l;
    const std::uint64_t width = std::uint64_t{1} << (l - p);
    const std::uint64_t j = t - start;
    ann.phase = l;
    ann.cls = p;
    ann.copy = static_cast<std::int64_t>(j / width);
    ann.fresh = ann.copy == 0;
    const std::uint64_t uid = start + j % width;
    auto r = rng_.derive(uid);
    const std::uint64_t cell = r.uniform_index(std::uint64_t{1} << l);
    const double offset = r.uniform01();
    // cell 2^-l + offset 2^-(p+l)
    const double x = std::ldexp(static_cast<double>(cell) + std::ldexp(offset, -static_cast<int>(p)),
                                -static_cast<int>(l));
    return {x, uid};
  }

 private:
  RngStream rng_;
};

// Witness for C5 without C8: on [2^k, 2^(k+1)) with k in S_i, X_t = Z^i at
// index floor(t / n_i), i.e. runs of n_i identical points on A_i. X_1 is idle.
class Condition8WitnessProcess final : public ContextProcess {
 public:
  explicit Condition8WitnessProcess(RngStream rng) : rng_(rng) {}
  [[nodiscard]] std::string kind() const override { return "condition8_witness"; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    const auto k = static_cast<unsigned>(std::bit_width(t)) - 1;
    if (k == 0) {
      ann.idle = true;
      return idle_context();
    }
    if (k > 40) throw OverflowError("condition8_witness supports t < 2^41");
    const unsigned i = residue_class(k);
    const std::uint64_t n = class_multiplicity(i);
    ann.phase = k;
    ann.cls = i;
    ann.copy = static_cast<std::int64_t>(t % n);
    ann.fresh = ann.copy == 0;
    const std::uint64_t uid = t - t % n;
    auto r = rng_.derive(uid);
    return {carrier_point(i, r.uniform01()), uid};
  }

 private:
  RngStream rng_;
};

// Odd times are fresh uniform draws; even times follow a deterministic C2
// sequence with a sqrt schedule over the even steps.
class C5ScheduledProcess final : public ContextProcess {
 public:
  explicit C5ScheduledProcess(RngStream rng) : rng_(rng), pool_(sqrt_schedule(), rng.derive("pool")) {}
  [[nodiscard]] std::string kind() const override { return "c5_scheduled"; }

 protected:
  ContextPoint emit(Time t, ProcessAnnotation& ann) override {
    if (t % 2 == 1) {
      ann.fresh = true;
      auto r = rng_.derive(t);
      return {r.uniform01(), t};
    }
    const ContextPoint inner = pool_.next();
    ann.fresh = pool_.annotation().fresh;
    // pool uid u (its own first-appearance step) maps to global step 2u
    return {inner.coord, 2 * inner.uid};
  }

 private:
  RngStream rng_;
  DeterministicC2Process pool_;
};

// Draw the first n contexts of a process.
inline std::vector<ContextPoint> take(ContextProcess& process, Time n,
                                      std::vector<ProcessAnnotation>* annotations = nullptr) {
  std::vector<ContextPoint> out;
  out.reserve(n);
  if (annotations) annotations->reserve(n);
  for (Time t = 0; t < n; ++t) {
    out.push_back(process.next());
    if (annotations) annotations->push_back(process.annotation());
  }
  return out;
}

}  // namespace ncb
