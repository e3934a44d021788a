#pragma once

// Composite learning rules built on the bandit primitives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ncb/bandit_core.hpp"
#include "ncb/core.hpp"
#include "ncb/timescales.hpp"

namespace ncb {

// Index of the dyadic cell of width 2^-m containing x; x = 1 joins the last cell.
inline std::uint64_t dyadic_cell(double x, unsigned m) {
  const double cells = std::ldexp(1.0, static_cast<int>(m));
  const auto c = static_cast<std::uint64_t>(std::floor(x * cells));
  const auto last = static_cast<std::uint64_t>(cells) - 1;
  return std::min(c, last);
}

// A pure, total map from contexts to arms.
class Policy {
 public:
  using Fn = std::function<ActionIndex(const ContextPoint&)>;

  Policy(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  ActionIndex operator()(const ContextPoint& x) const { return fn_(x); }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

using PolicyList = std::vector<Policy>;

inline Policy constant_policy(ActionIndex arm) {
  return Policy("const" + std::to_string(arm), [arm](const ContextPoint&) { return arm; });
}

inline Policy threshold_policy(double cut, ActionIndex below, ActionIndex at_or_above) {
  return Policy("threshold", [=](const ContextPoint& x) { return x.coord < cut ? below : at_or_above; });
}

// Piecewise constant on the 2^m dyadic cells of [0, 1].
inline Policy dyadic_policy(unsigned m, std::vector<ActionIndex> table, std::string name = "cells") {
  if (table.size() != (std::size_t{1} << m)) throw ContractError("dyadic policy table must have 2^m entries");
  return Policy(std::move(name), [m, t = std::move(table)](const ContextPoint& x) { return t[dyadic_cell(x.coord, m)]; });
}

// Per-context table keyed by uid, with a fallback arm elsewhere.
inline Policy lookup_policy(std::string name, std::unordered_map<std::uint64_t, ActionIndex> table,
                            ActionIndex fallback) {
  auto shared = std::make_shared<const std::unordered_map<std::uint64_t, ActionIndex>>(std::move(table));
  return Policy(std::move(name), [shared, fallback](const ContextPoint& x) {
    auto it = shared->find(x.uid);
    return it == shared->end() ? fallback : it->second;
  });
}

// Concatenated dyadic nets A(2^-i) = {j 2^-i : 0 <= j <= 2^i} for
// i = 1 .. depth, each in increasing order; points shared between nets repeat.
inline std::vector<double> net_expert_sequence(unsigned depth) {
  std::vector<double> seq;
  for (unsigned i = 1; i <= depth; ++i) {
    const std::uint64_t n = std::uint64_t{1} << i;
    for (std::uint64_t j = 0; j <= n; ++j) seq.push_back(std::ldexp(static_cast<double>(j), -static_cast<int>(i)));
  }
  return seq;
}

// Constant experts for a net over [0, 1] quantized onto K arms: point a plays
// arm min(K - 1, floor(a K)).
inline PolicyList net_policies(unsigned depth, std::size_t arms) {
  PolicyList out;
  for (double a : net_expert_sequence(depth)) {
    const auto arm = std::min<ActionIndex>(arms - 1, static_cast<ActionIndex>(std::floor(a * static_cast<double>(arms))));
    out.push_back(Policy("net" + std::to_string(a), [arm](const ContextPoint&) { return arm; }));
  }
  return out;
}

// ---------------------------------------------------------------------------

class FixedArmLearner final : public Learner {
 public:
  FixedArmLearner(std::size_t arms, ActionIndex arm) : arms_(arms), arm_(arm) {
    if (arm >= arms) throw ContractError("fixed arm out of range");
  }
  [[nodiscard]] std::size_t arms() const noexcept override { return arms_; }
  [[nodiscard]] std::string name() const override { return "fixed_arm"; }
  [[nodiscard]] std::uint64_t state_hash() const override { return detail::hash_combine(arm_, steps()); }

 protected:
  ActionIndex do_select(const HistoryView&, const RngStream&) override { return arm_; }
  void do_update(ActionIndex, double) override {}

 private:
  std::size_t arms_;
  ActionIndex arm_;
};

class UniformRandomLearner final : public Learner {
 public:
  explicit UniformRandomLearner(std::size_t arms) : arms_(arms) {
    if (arms == 0) throw ContractError("need at least one arm");
  }
  [[nodiscard]] std::size_t arms() const noexcept override { return arms_; }
  [[nodiscard]] std::string name() const override { return "uniform"; }
  [[nodiscard]] std::uint64_t state_hash() const override { return detail::hash_combine(arms_, steps()); }

 protected:
  ActionIndex do_select(const HistoryView& h, const RngStream& rng) override {
    auto r = rng.derive(h.t());
    return r.uniform_index(arms_);
  }
  void do_update(ActionIndex, double) override {}

 private:
  std::size_t arms_;
};

// Plain EXP3.IX that ignores contexts.
class Exp3IxLearner final : public Learner {
 public:
  explicit Exp3IxLearner(std::size_t arms) : inner_(arms) {}
  [[nodiscard]] std::size_t arms() const noexcept override { return inner_.arms(); }
  [[nodiscard]] std::string name() const override { return "exp3ix"; }
  [[nodiscard]] std::uint64_t state_hash() const override { return inner_.state_hash(); }
  [[nodiscard]] const Exp3Ix& inner() const noexcept { return inner_; }

 protected:
  ActionIndex do_select(const HistoryView& h, const RngStream& rng) override {
    auto r = rng.derive(h.t());
    return inner_.sample(r);
  }
  void do_update(ActionIndex a, double r) override { inner_.update(a, r); }

 private:
  Exp3Ix inner_;
};

// Independent EXP3.IX per distinct context. Each sub-learner draws from a
// stream keyed by (uid, visit), so its trajectory does not depend on how
// contexts interleave.
class PerInstanceExp3Ix final : public Learner {
 public:
  explicit PerInstanceExp3Ix(std::size_t arms) : arms_(arms) {
    if (arms < 2) throw ContractError("per-instance EXP3.IX needs K >= 2");
  }

  [[nodiscard]] std::size_t arms() const noexcept override { return arms_; }
  [[nodiscard]] std::string name() const override { return "per_instance_exp3ix"; }

  [[nodiscard]] std::uint64_t state_hash() const override {
    std::map<std::uint64_t, std::uint64_t> sorted;
    for (const auto& [uid, s] : subs_) sorted.emplace(uid, s.state_hash());
    std::uint64_t h = detail::hash_combine(0x9e1, steps());
    for (const auto& [uid, sh] : sorted) h = detail::hash_combine(detail::hash_combine(h, uid), sh);
    return h;
  }

  // nullopt if the context has not been visited.
  [[nodiscard]] std::optional<std::uint64_t> sub_state_hash(std::uint64_t uid) const {
    auto it = subs_.find(uid);
    if (it == subs_.end()) return std::nullopt;
    return it->second.state_hash();
  }
  [[nodiscard]] const Exp3Ix* sub_learner(std::uint64_t uid) const {
    auto it = subs_.find(uid);
    return it == subs_.end() ? nullptr : &it->second;
  }
  [[nodiscard]] std::size_t distinct_contexts() const noexcept { return subs_.size(); }

 protected:
  ActionIndex do_select(const HistoryView& h, const RngStream& rng) override {
    const std::uint64_t uid = h.current().uid;
    auto [it, inserted] = subs_.try_emplace(uid, arms_);
    current_ = &it->second;
    auto r = rng.derive(uid).derive(current_->steps());
    return current_->sample(r);
  }
  void do_update(ActionIndex a, double r) override { current_->update(a, r); }

 private:
  std::size_t arms_;
  std::unordered_map<std::uint64_t, Exp3Ix> subs_;
  Exp3Ix* current_ = nullptr;
};

// EXPINF where expert j plays policies[j](X_t).
class ExpInfOverPolicies final : public Learner {
 public:
  ExpInfOverPolicies(PolicyList policies, std::size_t arms)
      : policies_(std::move(policies)), arms_(arms), inner_(policies_.size()) {
    if (policies_.empty()) throw ContractError("EXPINF needs a non-empty policy list");
  }

  [[nodiscard]] std::size_t arms() const noexcept override { return arms_; }
  [[nodiscard]] std::string name() const override { return "expinf_policies"; }
  [[nodiscard]] std::uint64_t state_hash() const override { return inner_.state_hash(); }
  [[nodiscard]] const ExpInf& inner() const noexcept { return inner_; }
  [[nodiscard]] std::size_t last_expert() const noexcept { return last_expert_; }

 protected:
  ActionIndex do_select(const HistoryView& h, const RngStream& rng) override {
    auto r = rng.derive(h.t());
    last_expert_ = inner_.select(r);
    return policies_[last_expert_](h.current());
  }
  void do_update(ActionIndex, double r) override { inner_.update(r); }

 private:
  PolicyList policies_;
  std::size_t arms_;
  ExpInf inner_;
  std::size_t last_expert_ = 0;
};

// Independent EXPINF per distinct context over a shared expert list.
class PerInstanceExpInf final : public Learner {
 public:
  PerInstanceExpInf(PolicyList experts, std::size_t arms) : experts_(std::move(experts)), arms_(arms) {
    if (experts_.empty()) throw ContractError("per-instance EXPINF needs a non-empty expert list");
  }

  [[nodiscard]] std::size_t arms() const noexcept override { return arms_; }
  [[nodiscard]] std::string name() const override { return "per_instance_expinf"; }
  [[nodiscard]] std::uint64_t state_hash() const override {
    std::map<std::uint64_t, std::uint64_t> sorted;
    for (const auto& [uid, s] : subs_) sorted.emplace(uid, s.state_hash());
    std::uint64_t h = detail::hash_combine(0x9e2, steps());
    for (const auto& [uid, sh] : sorted) h = detail::hash_combine(detail::hash_combine(h, uid), sh);
    return h;
  }

 protected:
  ActionIndex do_select(const HistoryView& h, const RngStream& rng) override {
    const ContextPoint& x = h.current();
    auto [it, inserted] = subs_.try_emplace(x.uid, experts_.size());
    current_ = &it->second;
    auto r = rng.derive(x.uid).derive(current_->steps());
    return experts_[current_->select(r)](x);
  }
  void do_update(ActionIndex, double r) override { current_->update(r); }

 private:
  PolicyList experts_;
  std::size_t arms_;
  std::unordered_map<std::uint64_t, ExpInf> subs_;
  ExpInf* current_ = nullptr;
};

// ---------------------------------------------------------------------------
// Learner for C5 processes.
//
// Each time t gets (phase i, stage l, period k, category p). Within category p
// and stage l >= u(16p), Hedge picks among strategy 0 (a fresh EXP3.IX per
// context, scoped to the (category, period)) and strategies 1..i (policy j).
// A context's first time in a (category, period) draws the strategy from
// P_p(l, k; .); its duplicates inherit it. At each period end the
// importance-weighted period averages feed Hedge with eta_i.
//
// With a finite policy list of size m, the Hedge support is {0, ..., min(i, m)}.

// Importance-weighted period estimates:
//   est_j = sum_t 1[strategy_t = j] r_t / (probs_j * period_length)
inline std::vector<double> importance_weighted_estimates(std::span<const double> reward_sums,
                                                         std::span<const double> probs,
                                                         double period_length) {
  std::vector<double> est(probs.size(), 0.0);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (reward_sums[j] != 0.0) est[j] = reward_sums[j] / (probs[j] * period_length);
  }
  return est;
}

class C5Learner final : public Learner {
 public:
  struct HedgeSnapshot {
    Time t = 0;  // last time of the period that produced the update
    unsigned category = 0;
    unsigned stage = 0;
    unsigned phase = 0;
    std::uint64_t period = 0;     // period whose estimates were folded in
    std::vector<double> probs;    // P_p(l, period + 1; .)
  };

  C5Learner(PhaseSchedule schedule, PolicyList policies, std::size_t arms)
      : tracker_(std::move(schedule)), policies_(std::move(policies)), arms_(arms) {
    if (arms < 2) throw ContractError("C5 learner needs K >= 2");
  }

  [[nodiscard]] std::size_t arms() const noexcept override { return arms_; }
  [[nodiscard]] std::string name() const override { return "c5"; }
  [[nodiscard]] LearnerInternals internals() const override { return internals_; }
  [[nodiscard]] const PhaseSchedule& schedule() const noexcept { return tracker_.schedule(); }

  [[nodiscard]] std::uint64_t state_hash() const override {
    std::uint64_t h = detail::hash_combine(0xc5, steps());
    for (const auto& [p, c] : categories_) {
      h = detail::hash_combine(h, p);
      h = detail::hash_combine(h, c.stage);
      for (double v : c.hedge ? c.hedge->cumulative() : std::span<const double>{}) h = detail::hash_double(h, v);
    }
    std::map<std::pair<unsigned, std::uint64_t>, std::uint64_t> sorted;
    for (const auto& [key, s] : exp3_) sorted.emplace(key, s.state_hash());
    for (const auto& [key, sh] : sorted) h = detail::hash_combine(h, sh);
    return h;
  }

  // Current P_p(l, k; .) for category p; empty when Hedge is inactive for p.
  [[nodiscard]] std::vector<double> hedge_probabilities(unsigned category) const {
    auto it = categories_.find(category);
    if (it == categories_.end() || !it->second.hedge) return {};
    return it->second.probs;
  }

  [[nodiscard]] const std::vector<HedgeSnapshot>& hedge_log() const noexcept { return log_; }

  // Hedge support size at time t (strategies 0..min(i, m)).
  [[nodiscard]] std::size_t support_size(unsigned phase) const noexcept {
    return std::min<std::size_t>(phase, policies_.size()) + 1;
  }

 protected:
  ActionIndex do_select(const HistoryView& h, const RngStream& rng) override {
    const ContextPoint& x = h.current();
    const Time t = h.t();
    const auto entry = tracker_.observe(x);
    const Alg1Clock& clock = entry.clock;
    if (clock.period_begin != period_begin_) {
      period_begin_ = clock.period_begin;
      strategy_of_.clear();
      exp3_.clear();
    }
    const unsigned p = entry.category;
    step_ = Step{};
    step_.category = p;
    step_.clock = clock;
    step_.key = {p, x.uid};

    auto r = rng.derive(t);
    const bool initial = !schedule().reached(16 * std::size_t{p}, t);
    if (initial) {
      step_.strategy = 0;
    } else {
      CategoryState& cat = category_at_stage(p, clock);
      step_.hedged = true;
      auto it = strategy_of_.find(step_.key);
      if (it == strategy_of_.end()) {
        auto draw = r.derive(1);
        step_.strategy = draw.categorical(cat.probs);
        strategy_of_.emplace(step_.key, step_.strategy);
      } else {
        step_.strategy = it->second;
      }
    }

    internals_.category = p;
    internals_.phase = clock.phase;
    internals_.stage = clock.stage;
    internals_.period = static_cast<std::int64_t>(clock.period);
    internals_.strategy = static_cast<std::int64_t>(step_.strategy);

    if (step_.strategy == 0) {
      auto [it, inserted] = exp3_.try_emplace(step_.key, arms_);
      auto draw = r.derive(2);
      return it->second.sample(draw);
    }
    const ActionIndex a = policies_[step_.strategy - 1](x);
    if (a >= arms_) throw ContractError("policy returned an out-of-range arm");
    return a;
  }

  void do_update(ActionIndex a, double reward) override {
    if (step_.strategy == 0) exp3_.at(step_.key).update(a, reward);
    if (step_.hedged) categories_.at(step_.category).reward_sums[step_.strategy] += reward;

    const Time t = steps() + 1;
    if (t + 1 == step_.clock.period_end) close_period(t);
  }

 private:
  using Key = std::pair<unsigned, std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return static_cast<std::size_t>(detail::hash_combine(k.first, k.second));
    }
  };

  struct CategoryState {
    unsigned stage = 0;
    unsigned phase = 0;
    std::optional<Hedge> hedge;
    std::vector<double> probs;
    std::vector<double> reward_sums;
  };

  struct Step {
    unsigned category = 0;
    Alg1Clock clock;
    Key key{};
    std::size_t strategy = 0;
    bool hedged = false;
  };

  // Hedge state of category p for the current stage; reset to uniform when a
  // new stage begins.
  CategoryState& category_at_stage(unsigned p, const Alg1Clock& clock) {
    CategoryState& cat = categories_[p];
    if (!cat.hedge || cat.stage != clock.stage) {
      const std::size_t n = support_size(clock.phase);
      cat.stage = clock.stage;
      cat.phase = clock.phase;
      cat.hedge.emplace(n, PhaseSchedule::eta(clock.phase) > 0.0 ? PhaseSchedule::eta(clock.phase) : 1.0);
      cat.probs.assign(n, 1.0 / static_cast<double>(n));
      cat.reward_sums.assign(n, 0.0);
    }
    return cat;
  }

  void close_period(Time t) {
    const Alg1Clock& clock = step_.clock;
    const double len = std::ldexp(1.0, static_cast<int>(clock.stage) - static_cast<int>(clock.phase));
    for (auto& [p, cat] : categories_) {
      if (!cat.hedge || cat.stage != clock.stage) continue;
      const auto est = importance_weighted_estimates(cat.reward_sums, cat.probs, len);
      cat.hedge->update(est);
      cat.probs = cat.hedge->probabilities();
      std::fill(cat.reward_sums.begin(), cat.reward_sums.end(), 0.0);
      log_.push_back({t, p, clock.stage, clock.phase, clock.period, cat.probs});
    }
  }

  CategoryTracker tracker_;
  PolicyList policies_;
  std::size_t arms_;

  Time period_begin_ = 0;
  std::unordered_map<Key, std::size_t, KeyHash> strategy_of_;
  std::unordered_map<Key, Exp3Ix, KeyHash> exp3_;
  std::map<unsigned, CategoryState> categories_;
  std::vector<HedgeSnapshot> log_;

  Step step_;
  LearnerInternals internals_;
};

}  // namespace ncb
