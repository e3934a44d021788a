#pragma once

// Domain types and the learner contract shared by every module.

#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "ncb/rng.hpp"

namespace ncb {

// Misuse of a contract: malformed history, double update, bad parameters.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Arithmetic that would leave the 64-bit time range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Invalid user configuration (config files, CLI arguments).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Time = std::uint64_t;
using ActionIndex = std::size_t;

// A context on [0, 1]. Duplicates are detected by uid only; generators create
// duplicates by copying a point, so equal uids always carry equal coords.
struct ContextPoint {
  double coord = 0.0;
  std::uint64_t uid = 0;

  friend bool operator==(const ContextPoint&, const ContextPoint&) = default;
};

// Reserved uid of the idle symbol emitted by the counterexample processes.
inline constexpr std::uint64_t kIdleUid = 0;

inline constexpr ContextPoint idle_context() noexcept { return {0.0, kIdleUid}; }

inline double checked_reward(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ContractError("reward outside [0, 1]: " + std::to_string(r));
  }
  return r;
}

// What a learner may look at when choosing the action at time t: the contexts
// up to and including t, and its own past actions and observed rewards.
struct HistoryView {
  std::span<const ContextPoint> contexts;  // size t
  std::span<const ActionIndex> actions;    // size t - 1
  std::span<const double> rewards;         // size t - 1

  [[nodiscard]] Time t() const noexcept { return contexts.size(); }
  [[nodiscard]] const ContextPoint& current() const { return contexts.back(); }

  [[nodiscard]] bool well_formed() const noexcept {
    return !contexts.empty() && actions.size() + 1 == contexts.size() &&
           rewards.size() == actions.size();
  }
};

// Per-step diagnostics a learner may expose for traces. Unused fields stay at
// their sentinel.
struct LearnerInternals {
  static constexpr std::int64_t kNone = -1;
  std::int64_t category = kNone;
  std::int64_t phase = kNone;
  std::int64_t stage = kNone;
  std::int64_t period = kNone;
  std::int64_t strategy = kNone;
};

// Sequential decision rule with bandit feedback: select from history, then
// observe the reward of the selected action only.
//
// The rng argument is the learner's run-level stream. Learners derive their
// own per-step (or per-context) children from it, so the same run seed always
// produces the same trajectory.
class Learner {
 public:
  virtual ~Learner() = default;

  ActionIndex select(const HistoryView& history, const RngStream& rng) {
    if (pending_) throw ContractError("select called twice without update");
    if (!history.well_formed()) throw ContractError("malformed history view");
    if (history.t() != steps_ + 1) {
      throw ContractError("history length " + std::to_string(history.t()) +
                          " disagrees with learner step " + std::to_string(steps_ + 1));
    }
    const ActionIndex a = do_select(history, rng);
    if (a >= arms()) throw ContractError("learner selected an out-of-range arm");
    pending_ = true;
    last_action_ = a;
    return a;
  }

  void update(ActionIndex chosen, double reward) {
    if (!pending_) throw ContractError("update without a pending select");
    if (chosen != last_action_) throw ContractError("update for an action that was not selected");
    do_update(chosen, checked_reward(reward));
    pending_ = false;
    ++steps_;
  }

  [[nodiscard]] virtual std::size_t arms() const noexcept = 0;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual LearnerInternals internals() const { return {}; }
  // Hash of the full learner state; equal hashes across replays certify
  // bit-identical statistics.
  [[nodiscard]] virtual std::uint64_t state_hash() const = 0;

  [[nodiscard]] Time steps() const noexcept { return steps_; }

 protected:
  virtual ActionIndex do_select(const HistoryView& history, const RngStream& rng) = 0;
  virtual void do_update(ActionIndex chosen, double reward) = 0;

 private:
  Time steps_ = 0;
  bool pending_ = false;
  ActionIndex last_action_ = 0;
};

namespace detail {

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_double(std::uint64_t h, double v) noexcept {
  return hash_combine(h, std::bit_cast<std::uint64_t>(v));
}

}  // namespace detail

}  // namespace ncb
