#pragma once

// Reward mechanisms by conditioning tier.
//
// A mechanism computes the full reward vector at time t from a RewardView.
// The view hands out only what the mechanism's tier may condition on and
// throws TierViolation otherwise:
//
//   stationary   current context
//   oblivious    + t
//   online       + past contexts
//   prescient    + the whole context sequence
//   adversarial  + past actions and rewards

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ncb/core.hpp"
#include "ncb/learners.hpp"
#include "ncb/rng.hpp"
#include "ncb/timescales.hpp"

namespace ncb {

enum class RewardTier { kStationary = 0, kOblivious = 1, kOnline = 2, kPrescient = 3, kAdversarial = 4 };

inline std::string to_string(RewardTier tier) {
  switch (tier) {
    case RewardTier::kStationary: return "stationary";
    case RewardTier::kOblivious: return "oblivious";
    case RewardTier::kOnline: return "online";
    case RewardTier::kPrescient: return "prescient";
    case RewardTier::kAdversarial: return "adversarial";
  }
  return "unknown";
}

class TierViolation : public ContractError {
 public:
  using ContractError::ContractError;
};

class RewardView {
 public:
  // all_contexts holds at least t entries; actions and rewards hold the
  // learner's first t - 1 choices and observed rewards.
  RewardView(RewardTier tier, Time t, std::span<const ContextPoint> all_contexts,
             std::span<const ActionIndex> actions, std::span<const double> rewards)
      : tier_(tier), t_(t), contexts_(all_contexts), actions_(actions), rewards_(rewards) {
    if (t == 0 || contexts_.size() < t || actions_.size() + 1 < t || rewards_.size() + 1 < t) {
      throw ContractError("reward view shorter than t");
    }
  }

  [[nodiscard]] RewardTier tier() const noexcept { return tier_; }
  [[nodiscard]] const ContextPoint& current() const { return contexts_[t_ - 1]; }

  // Same data seen with fewer rights; used by wrappers to call their bases.
  [[nodiscard]] RewardView restricted(RewardTier lower) const {
    if (static_cast<int>(lower) > static_cast<int>(tier_)) throw TierViolation("tier guard: cannot widen a view");
    RewardView v = *this;
    v.tier_ = lower;
    return v;
  }

  [[nodiscard]] Time t() const {
    require(RewardTier::kOblivious, "time index");
    return t_;
  }
  // x_1 .. x_t.
  [[nodiscard]] std::span<const ContextPoint> contexts_so_far() const {
    require(RewardTier::kOnline, "past contexts");
    return contexts_.first(t_);
  }
  [[nodiscard]] std::span<const ContextPoint> all_contexts() const {
    require(RewardTier::kPrescient, "future contexts");
    return contexts_;
  }
  [[nodiscard]] std::span<const ActionIndex> past_actions() const {
    require(RewardTier::kAdversarial, "past actions");
    return actions_.first(t_ - 1);
  }
  [[nodiscard]] std::span<const double> past_rewards() const {
    require(RewardTier::kAdversarial, "past rewards");
    return rewards_.first(t_ - 1);
  }

 private:
  void require(RewardTier needed, const char* what) const {
    if (static_cast<int>(tier_) < static_cast<int>(needed)) {
      throw TierViolation(std::string("tier guard: a ") + to_string(tier_) + " mechanism read " + what);
    }
  }

  RewardTier tier_;
  Time t_;
  std::span<const ContextPoint> contexts_;
  std::span<const ActionIndex> actions_;
  std::span<const double> rewards_;
};

class RewardMechanism {
 public:
  virtual ~RewardMechanism() = default;

  [[nodiscard]] virtual RewardTier tier() const = 0;
  [[nodiscard]] virtual std::size_t arms() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;

  // Full reward vector at time view's t. rng is the reward stream for that
  // step; mechanisms that draw noise must use it and nothing else.
  void rewards(const RewardView& view, RngStream& rng, std::span<double> out) {
    if (view.tier() != tier()) throw ContractError("view tier does not match the mechanism");
    if (out.size() != arms()) throw ContractError("reward vector has the wrong width");
    compute(view, rng, out);
    for (double r : out) checked_reward(r);
  }

 protected:
  virtual void compute(const RewardView& view, RngStream& rng, std::span<double> out) = 0;
};

using MechanismFactory = std::function<std::unique_ptr<RewardMechanism>()>;

// ---------------------------------------------------------------------------

class ZeroReward final : public RewardMechanism {
 public:
  explicit ZeroReward(std::size_t arms) : arms_(arms) {}
  [[nodiscard]] RewardTier tier() const override { return RewardTier::kStationary; }
  [[nodiscard]] std::size_t arms() const override { return arms_; }
  [[nodiscard]] std::string name() const override { return "zero"; }

 protected:
  void compute(const RewardView&, RngStream&, std::span<double> out) override {
    std::fill(out.begin(), out.end(), 0.0);
  }

 private:
  std::size_t arms_;
};

// Bernoulli rewards whose means depend on the dyadic cell of x:
// means[cell * K + a] over 2^m cells.
class StationaryBernoulli final : public RewardMechanism {
 public:
  StationaryBernoulli(unsigned m, std::size_t arms, std::vector<double> means)
      : m_(m), arms_(arms), means_(std::move(means)) {
    if (arms == 0 || means_.size() != (std::size_t{1} << m) * arms) {
      throw ContractError("mean table must have 2^m * K entries");
    }
    for (double p : means_) {
      if (!(p >= 0.0 && p <= 1.0)) throw ContractError("Bernoulli mean outside [0, 1]");
    }
  }

  // Same means on every context.
  static StationaryBernoulli uniform(std::vector<double> arm_means) {
    const std::size_t k = arm_means.size();
    return StationaryBernoulli(0, k, std::move(arm_means));
  }

  [[nodiscard]] RewardTier tier() const override { return RewardTier::kStationary; }
  [[nodiscard]] std::size_t arms() const override { return arms_; }
  [[nodiscard]] std::string name() const override { return "stationary_bernoulli"; }
  [[nodiscard]] double mean(double x, ActionIndex a) const { return means_[dyadic_cell(x, m_) * arms_ + a]; }

  // The policy playing the highest-mean arm on each cell (lowest index on ties).
  [[nodiscard]] Policy optimal_policy() const {
    std::vector<ActionIndex> table(std::size_t{1} << m_);
    for (std::size_t c = 0; c < table.size(); ++c) {
      ActionIndex best = 0;
      for (ActionIndex a = 1; a < arms_; ++a) {
        if (means_[c * arms_ + a] > means_[c * arms_ + best]) best = a;
      }
      table[c] = best;
    }
    return dyadic_policy(m_, std::move(table), "optimal");
  }

 protected:
  void compute(const RewardView& view, RngStream& rng, std::span<double> out) override {
    const std::size_t c = dyadic_cell(view.current().coord, m_);
    for (ActionIndex a = 0; a < arms_; ++a) out[a] = rng.bernoulli(means_[c * arms_ + a]) ? 1.0 : 0.0;
  }

 private:
  unsigned m_;
  std::size_t arms_;
  std::vector<double> means_;
};

// Smallest m such that the dyadic cells of width 2^-m are at most half the
// minimum separation of the given distinct coordinates. Capped at 52.
inline unsigned separating_cell_exponent(std::vector<double> coords) {
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  double sep = 1.0;
  for (std::size_t j = 1; j < coords.size(); ++j) sep = std::min(sep, coords[j] - coords[j - 1]);
  const double delta = sep / 2.0;
  unsigned m = 0;
  while (m < 52 && std::ldexp(1.0, -static_cast<int>(m)) > delta) ++m;
  return m;
}

// Uncertain arm a1 pays the bit of x's dyadic cell; safe arm a2 pays 3/4;
// every other arm pays 0. Off the support (and on the idle symbol) all arms
// pay 0. Bits are Bernoulli(1/2), drawn lazily from (bit stream, cell) and
// memoized. Two distinct uids in one cell are a collision: the resolution m
// is too coarse for this realization.
class PartitionBernoulli final : public RewardMechanism {
 public:
  struct Params {
    unsigned m = 30;
    std::size_t arms = 2;
    ActionIndex a1 = 0;
    ActionIndex a2 = 1;
    std::function<bool(double)> support;  // empty: all of [0, 1]
  };

  PartitionBernoulli(Params params, RngStream bits) : params_(std::move(params)), bits_(bits) {
    if (params_.arms < 2 || params_.a1 >= params_.arms || params_.a2 >= params_.arms || params_.a1 == params_.a2) {
      throw ContractError("partition Bernoulli needs two distinct arms within K");
    }
    if (params_.m > 52) throw ContractError("cell exponent above 52 is not representable");
  }

  [[nodiscard]] RewardTier tier() const override { return RewardTier::kOblivious; }
  [[nodiscard]] std::size_t arms() const override { return params_.arms; }
  [[nodiscard]] std::string name() const override { return "partition_bernoulli"; }
  [[nodiscard]] ActionIndex a1() const noexcept { return params_.a1; }
  [[nodiscard]] ActionIndex a2() const noexcept { return params_.a2; }

  [[nodiscard]] bool on_support(const ContextPoint& x) const {
    return x.uid != kIdleUid && (!params_.support || params_.support(x.coord));
  }

  // Bit of the cell containing x; memoizes and checks for collisions.
  int bit(const ContextPoint& x) {
    const std::uint64_t cell = dyadic_cell(x.coord, params_.m);
    auto [it, inserted] = cells_.try_emplace(cell, Cell{x.uid, 0});
    if (inserted) {
      auto r = bits_.derive(cell);
      it->second.bit = r.bernoulli(0.5) ? 1 : 0;
    } else if (it->second.uid != x.uid) {
      throw ContractError("partition cell collision: resolution 2^-" + std::to_string(params_.m) +
                          " does not separate the realized contexts");
    }
    return it->second.bit;
  }

 protected:
  void compute(const RewardView& view, RngStream&, std::span<double> out) override {
    std::fill(out.begin(), out.end(), 0.0);
    const ContextPoint& x = view.current();
    if (!on_support(x)) return;
    out[params_.a1] = static_cast<double>(bit(x));
    out[params_.a2] = 0.75;
  }

 private:
  struct Cell {
    std::uint64_t uid;
    int bit;
  };

  Params params_;
  RngStream bits_;
  std::unordered_map<std::uint64_t, Cell> cells_;
};

// Delegates to one base mechanism per phase [starts[j], starts[j+1]); masked
// phases pay 0. Times before starts[0] are unmapped.
class PhaseSwitching final : public RewardMechanism {
 public:
  PhaseSwitching(std::vector<std::unique_ptr<RewardMechanism>> bases, std::vector<Time> starts,
                 std::vector<bool> deleted = {}, RewardTier tier = RewardTier::kOblivious)
      : bases_(std::move(bases)), starts_(std::move(starts)), deleted_(std::move(deleted)), tier_(tier) {
    if (bases_.empty() || bases_.size() != starts_.size()) throw ContractError("one start time per base mechanism");
    if (deleted_.empty()) deleted_.assign(bases_.size(), false);
    if (deleted_.size() != bases_.size()) throw ContractError("deletion mask has the wrong length");
    if (tier_ != RewardTier::kOblivious && tier_ != RewardTier::kOnline) {
      throw ContractError("phase switching is oblivious or online");
    }
    for (std::size_t j = 0; j < bases_.size(); ++j) {
      if (bases_[j]->arms() != bases_[0]->arms()) throw ContractError("base mechanisms disagree on K");
      if (static_cast<int>(bases_[j]->tier()) > static_cast<int>(tier_)) {
        throw ContractError("base mechanism tier exceeds the switching tier");
      }
      if (j > 0 && starts_[j] <= starts_[j - 1]) throw ContractError("phase starts must increase");
    }
  }

  [[nodiscard]] RewardTier tier() const override { return tier_; }
  [[nodiscard]] std::size_t arms() const override { return bases_[0]->arms(); }
  [[nodiscard]] std::string name() const override { return "phase_switching"; }

  [[nodiscard]] std::size_t phase_of(Time t) const {
    if (t < starts_[0]) throw ContractError("time " + std::to_string(t) + " precedes every phase");
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
  }

 protected:
  void compute(const RewardView& view, RngStream& rng, std::span<double> out) override {
    const std::size_t j = phase_of(view.t());
    if (deleted_[j]) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    bases_[j]->rewards(view.restricted(bases_[j]->tier()), rng, out);
  }

 private:
  std::vector<std::unique_ptr<RewardMechanism>> bases_;
  std::vector<Time> starts_;
  std::vector<bool> deleted_;
  RewardTier tier_;
};

// Online wrapper over an oblivious base: pays the base reward only when x_t
// has not appeared earlier in its scale-p period and did not appear before
// the start of the current block. Block starts are sorted; with none given
// only the within-period rule applies.
class OnlineDuplicateZeroing final : public RewardMechanism {
 public:
  OnlineDuplicateZeroing(std::unique_ptr<RewardMechanism> base, unsigned scale, std::vector<Time> block_starts = {})
      : base_(std::move(base)), scale_(scale), blocks_(std::move(block_starts)) {
    if (static_cast<int>(base_->tier()) > static_cast<int>(RewardTier::kOblivious)) {
      throw ContractError("duplicate zeroing wraps a stationary or oblivious base");
    }
    if (!std::is_sorted(blocks_.begin(), blocks_.end())) throw ContractError("block starts must be sorted");
  }

  [[nodiscard]] RewardTier tier() const override { return RewardTier::kOnline; }
  [[nodiscard]] std::size_t arms() const override { return base_->arms(); }
  [[nodiscard]] std::string name() const override { return "online_duplicate_zeroing"; }

 protected:
  void compute(const RewardView& view, RngStream& rng, std::span<double> out) override {
    const Time t = view.t();
    const auto past = view.contexts_so_far();
    // Catch up on contexts the wrapper has not indexed yet (x_1 .. x_{t-1}).
    for (Time s = indexed_ + 1; s < t; ++s) note(past[s - 1].uid, s);
    indexed_ = t - 1;

    const std::uint64_t uid = view.current().uid;
    bool zero = false;
    if (auto it = seen_.find(uid); it != seen_.end()) {
      const Time first = it->second.first;
      const Time last = it->second.second;
      zero = last >= period_start(t, scale_) || first < block_start(t);
    }
    if (zero) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    base_->rewards(view.restricted(base_->tier()), rng, out);
  }

 private:
  void note(std::uint64_t uid, Time s) {
    auto [it, inserted] = seen_.try_emplace(uid, s, s);
    if (!inserted) it->second.second = s;
  }
  [[nodiscard]] Time block_start(Time t) const {
    const auto it = std::upper_bound(blocks_.begin(), blocks_.end(), t);
    return it == blocks_.begin() ? 1 : *std::prev(it);
  }

  std::unique_ptr<RewardMechanism> base_;
  unsigned scale_;
  std::vector<Time> blocks_;
  Time indexed_ = 0;
  std::unordered_map<std::uint64_t, std::pair<Time, Time>> seen_;  // uid -> (first, last)
};

// Adversarial mechanism: an arm pays 1 iff it differs from the learner's
// previous action. At t = 1 only arm 0 pays.
class TitForTat final : public RewardMechanism {
 public:
  explicit TitForTat(std::size_t arms) : arms_(arms) {
    if (arms < 2) throw ContractError("tit-for-tat needs K >= 2");
  }
  [[nodiscard]] RewardTier tier() const override { return RewardTier::kAdversarial; }
  [[nodiscard]] std::size_t arms() const override { return arms_; }
  [[nodiscard]] std::string name() const override { return "tit_for_tat"; }

 protected:
  void compute(const RewardView& view, RngStream&, std::span<double> out) override {
    const auto acts = view.past_actions();
    for (ActionIndex a = 0; a < arms_; ++a) out[a] = acts.empty() ? (a == 0 ? 1.0 : 0.0) : (a != acts.back() ? 1.0 : 0.0);
  }

 private:
  std::size_t arms_;
};

// ---------------------------------------------------------------------------

enum class GuardVerdict { kIdentical, kDiffers, kExempt };

// Replays a fresh mechanism from the factory under two action sequences with
// the same reward stream and compares the full reward vectors bit for bit.
inline GuardVerdict tier_guard_replay(const MechanismFactory& make, std::span<const ContextPoint> contexts,
                                      std::span<const ActionIndex> actions_a, std::span<const ActionIndex> actions_b,
                                      const RngStream& reward_stream) {
  auto probe = make();
  if (probe->tier() == RewardTier::kAdversarial) return GuardVerdict::kExempt;
  const Time n = contexts.size();
  if (actions_a.size() < n || actions_b.size() < n) throw ContractError("action sequences shorter than the stream");

  auto replay = [&](std::span<const ActionIndex> actions) {
    auto mech = make();
    const std::size_t k = mech->arms();
    std::vector<double> matrix(n * k);
    std::vector<double> chosen(n);
    for (Time t = 1; t <= n; ++t) {
      RewardView view(mech->tier(), t, contexts, actions.first(t - 1), std::span<const double>(chosen).first(t - 1));
      auto rng = reward_stream.derive(t);
      const std::span<double> row(matrix.data() + (t - 1) * k, k);
      mech->rewards(view, rng, row);
      if (actions[t - 1] >= k) throw ContractError("replay action out of range");
      chosen[t - 1] = row[actions[t - 1]];
    }
    return matrix;
  };

  const auto ra = replay(actions_a);
  const auto rb = replay(actions_b);
  for (std::size_t j = 0; j < ra.size(); ++j) {
    if (std::bit_cast<std::uint64_t>(ra[j]) != std::bit_cast<std::uint64_t>(rb[j])) return GuardVerdict::kDiffers;
  }
  return GuardVerdict::kIdentical;
}

}  // namespace ncb
