#pragma once

// Finite-horizon statistics of context streams and run traces.
//
// Every limsup/sup over time is replaced by a max over an explicit window
// [lo, hi] of the realized prefix; every quantity is an exact function of the
// trace.

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

#include "ncb/bandit_core.hpp"
#include "ncb/core.hpp"
#include "ncb/harness.hpp"
#include "ncb/learners.hpp"
#include "ncb/processes.hpp"
#include "ncb/rewards.hpp"
#include "ncb/timescales.hpp"

namespace ncb {

struct MeasurableSet {
  std::string name;
  std::function<bool(double)> contains;
  double measure = 0.0;  // Lebesgue measure
};

using SetFamily = std::vector<MeasurableSet>;

// Union of disjoint half-open intervals [a, b).
inline MeasurableSet interval_set(std::vector<std::pair<double, double>> intervals, std::string name = "intervals") {
  std::sort(intervals.begin(), intervals.end());
  double measure = 0.0;
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    const auto [a, b] = intervals[j];
    if (!(a <= b)) throw ContractError("interval endpoints out of order");
    if (j > 0 && a < intervals[j - 1].second) throw ContractError("intervals overlap");
    measure += b - a;
  }
  auto contains = [iv = std::move(intervals)](double x) {
    auto it = std::upper_bound(iv.begin(), iv.end(), std::pair<double, double>{x, 2.0});
    if (it == iv.begin()) return false;
    --it;
    return x >= it->first && x < it->second;
  };
  return {std::move(name), std::move(contains), measure};
}

inline MeasurableSet full_set() { return {"full", [](double) { return true; }, 1.0}; }
inline MeasurableSet empty_set() { return {"empty", [](double) { return false; }, 0.0}; }

inline MeasurableSet carrier_set(unsigned i) {
  return {"carrier" + std::to_string(i), [i](double x) { return in_carrier(i, x); },
          std::ldexp(1.0, -static_cast<int>(i))};
}

inline MeasurableSet comb_set(unsigned p, unsigned l) {
  return {"comb" + std::to_string(p) + "_" + std::to_string(l), [p, l](double x) { return in_comb(p, l, x); },
          std::ldexp(1.0, -static_cast<int>(p))};
}

struct Window {
  Time lo = 1;
  Time hi = 1;
};

// Powers of two up to n, plus n itself.
inline std::vector<Time> pow2_checkpoints(Time n) {
  std::vector<Time> out;
  for (Time c = 1; c <= n && c != 0; c <<= 1) out.push_back(c);
  if (out.empty() || out.back() != n) out.push_back(n);
  return out;
}

// Indicator of t in T^p for t = 1 .. n (index t - 1).
inline std::vector<char> first_appearance_selector(std::span<const ContextPoint> contexts, unsigned p) {
  std::vector<char> sel(contexts.size());
  std::unordered_map<std::uint64_t, Time> last;
  last.reserve(contexts.size());
  for (Time t = 1; t <= contexts.size(); ++t) {
    auto [it, inserted] = last.try_emplace(contexts[t - 1].uid, t);
    sel[t - 1] = inserted || it->second < period_start(t, p);
    it->second = t;
  }
  return sel;
}

// max over T in the window of (1/T) sum_{t <= T, selected} 1_A(X_t).
// An empty selector selects every t.
inline double empirical_submeasure(std::span<const ContextPoint> contexts, std::span<const char> selector,
                                   const MeasurableSet& set, Window w) {
  if (w.lo == 0 || w.lo > w.hi) throw ContractError("empty statistic window");
  if (w.hi > contexts.size()) throw ContractError("window exceeds the stream prefix");
  if (!selector.empty() && selector.size() < w.hi) throw ContractError("selector shorter than the window");
  std::uint64_t hits = 0;
  double best = 0.0;
  for (Time t = 1; t <= w.hi; ++t) {
    if ((selector.empty() || selector[t - 1]) && set.contains(contexts[t - 1].coord)) ++hits;
    if (t >= w.lo) best = std::max(best, static_cast<double>(hits) / static_cast<double>(t));
  }
  return best;
}

struct DistinctPoint {
  Time t = 0;
  std::uint64_t distinct = 0;
  double ratio = 0.0;
};

inline std::vector<DistinctPoint> distinct_visit_curve(std::span<const ContextPoint> contexts,
                                                       std::vector<Time> checkpoints = {}) {
  if (checkpoints.empty()) checkpoints = pow2_checkpoints(contexts.size());
  std::vector<DistinctPoint> out;
  std::unordered_map<std::uint64_t, char> seen;
  std::size_t c = 0;
  for (Time t = 1; t <= contexts.size() && c < checkpoints.size(); ++t) {
    seen.try_emplace(contexts[t - 1].uid, 1);
    while (c < checkpoints.size() && checkpoints[c] == t) {
      out.push_back({t, seen.size(), static_cast<double>(seen.size()) / static_cast<double>(t)});
      ++c;
    }
  }
  return out;
}

// Windowed empirical submeasure of each set along T^p.
inline std::vector<double> scale_occupancy(std::span<const ContextPoint> contexts, unsigned p,
                                           const SetFamily& family, Window w) {
  const auto sel = first_appearance_selector(contexts, p);
  std::vector<double> out;
  out.reserve(family.size());
  for (const auto& set : family) out.push_back(empirical_submeasure(contexts, sel, set, w));
  return out;
}

// sup over T' in [T, prefix end] of (1/T') sum_{t <= T', t in T^p} 1_A(X_t).
inline double deviation_stat(std::span<const ContextPoint> contexts, unsigned p, const MeasurableSet& set, Time t) {
  const auto sel = first_appearance_selector(contexts, p);
  return empirical_submeasure(contexts, sel, set, {t, contexts.size()});
}

namespace detail {

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  [[nodiscard]] std::uint64_t prefix(std::size_t i) const {
    i = std::min(i, tree_.size() - 1);
    std::uint64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::uint64_t> tree_;
};

}  // namespace detail

using CapSchedule = std::function<std::uint64_t(Time)>;

struct CapPoint {
  Time t = 0;
  std::vector<double> values;  // one per set
};

// (1/T) sum_{t <= T} 1_A(X_t) 1[N_t(X_t) <= Psi(T)] at each checkpoint, where
// N_t(x) counts occurrences of x in x_1 .. x_t.
inline std::vector<CapPoint> duplicate_cap_curve(std::span<const ContextPoint> contexts, const CapSchedule& psi,
                                                 const SetFamily& family, std::vector<Time> checkpoints = {}) {
  const Time n = contexts.size();
  if (checkpoints.empty()) checkpoints = pow2_checkpoints(n);
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw ContractError("checkpoints must be sorted");
  Time prev_cap = 0;
  for (Time c : checkpoints) {
    if (psi(c) < prev_cap) throw ContractError("cap schedule must be non-decreasing");
    prev_cap = psi(c);
  }
  std::vector<CapPoint> out(checkpoints.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    out[c].t = checkpoints[c];
    out[c].values.resize(family.size());
  }
  std::vector<std::uint64_t> counts(n);
  {
    std::unordered_map<std::uint64_t, std::uint64_t> occ;
    for (Time t = 1; t <= n; ++t) counts[t - 1] = ++occ[contexts[t - 1].uid];
  }
  for (std::size_t s = 0; s < family.size(); ++s) {
    detail::Fenwick fw(n);
    std::size_t c = 0;
    for (Time t = 1; t <= n && c < checkpoints.size(); ++t) {
      if (family[s].contains(contexts[t - 1].coord)) fw.add(counts[t - 1]);
      while (c < checkpoints.size() && checkpoints[c] == t) {
        out[c].values[s] = static_cast<double>(fw.prefix(psi(t))) / static_cast<double>(t);
        ++c;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct RegretReport {
  std::string policy;
  std::vector<Time> checkpoints;
  std::vector<double> cum_learner;  // sum of learner rewards up to each checkpoint
  std::vector<double> cum_policy;
  std::vector<double> cum_regret;
  long double total_learner = 0.0L;
  long double total_policy = 0.0L;
  Time horizon = 0;

  [[nodiscard]] double regret() const { return static_cast<double>(total_policy - total_learner); }
  [[nodiscard]] double average_regret() const { return horizon == 0 ? 0.0 : regret() / static_cast<double>(horizon); }
};

inline ActionIndex checked_policy_arm(const Policy& policy, const ContextPoint& x, std::size_t arms) {
  const ActionIndex a = policy(x);
  if (a >= arms) throw ContractError("policy " + policy.name() + " emitted an out-of-range arm");
  return a;
}

// sum_t r_t(pi(X_t)) - r_t(a_t) along the realized trace.
inline RegretReport regret_vs_policy(const Trace& trace, const Policy& policy, std::vector<Time> checkpoints = {}) {
  const Time n = trace.horizon();
  if (trace.reward_matrix.size() != n * trace.arms) throw ContractError("trace lacks full reward vectors");
  if (checkpoints.empty()) checkpoints = pow2_checkpoints(n);
  RegretReport rep;
  rep.policy = policy.name();
  rep.horizon = n;
  std::size_t c = 0;
  for (Time t = 1; t <= n; ++t) {
    const ActionIndex a = checked_policy_arm(policy, trace.contexts[t - 1], trace.arms);
    rep.total_policy += trace.row(t)[a];
    rep.total_learner += trace.rewards[t - 1];
    while (c < checkpoints.size() && checkpoints[c] == t) {
      rep.checkpoints.push_back(t);
      rep.cum_policy.push_back(static_cast<double>(rep.total_policy));
      rep.cum_learner.push_back(static_cast<double>(rep.total_learner));
      rep.cum_regret.push_back(static_cast<double>(rep.total_policy - rep.total_learner));
      ++c;
    }
  }
  return rep;
}

// Regret against the policy on the window [lo, hi].
inline double window_regret(const Trace& trace, const Policy& policy, Window w) {
  if (w.lo == 0 || w.lo > w.hi || w.hi > trace.horizon()) throw ContractError("bad regret window");
  long double s = 0.0L;
  for (Time t = w.lo; t <= w.hi; ++t) {
    s += trace.row(t)[checked_policy_arm(policy, trace.contexts[t - 1], trace.arms)] - trace.rewards[t - 1];
  }
  return static_cast<double>(s);
}

// ---------------------------------------------------------------------------
// Personalization vs. generalization on one duplication block.

// A_q: steps of sub-phase q where a1 was played on a block position that had
// not been played with a1 in sub-phases 1 .. q-1. never_explored counts the
// steps whose position had not yet received a1 up to and including that step.
// Identity: never_explored + sum_q (Q - q + 1) A_q = Q * block_size.
struct ExplorationCounts {
  std::vector<std::uint64_t> fresh;  // A_1 .. A_Q
  std::uint64_t never_explored = 0;
  std::uint64_t block_size = 0;

  [[nodiscard]] std::uint64_t block_steps() const { return fresh.size() * block_size; }
  [[nodiscard]] bool identity_holds() const {
    const std::uint64_t q_max = fresh.size();
    std::uint64_t s = never_explored;
    for (std::uint64_t q = 1; q <= q_max; ++q) s += (q_max - q + 1) * fresh[q - 1];
    return s == block_steps();
  }
};

// Counts over the first `subphases` sub-phases of the block starting at time
// `start` (1-based) with `block_size` positions.
inline ExplorationCounts exploration_counts(std::span<const ActionIndex> actions, Time start, std::uint64_t block_size,
                                            std::uint64_t subphases, ActionIndex a1) {
  if (start == 0 || block_size == 0) throw ContractError("bad block geometry");
  if (start - 1 + subphases * block_size > actions.size()) throw ContractError("block extends past the trace");
  ExplorationCounts ec;
  ec.block_size = block_size;
  ec.fresh.assign(subphases, 0);
  std::vector<char> explored(block_size, 0);
  for (std::uint64_t q = 0; q < subphases; ++q) {
    for (std::uint64_t j = 0; j < block_size; ++j) {
      const ActionIndex a = actions[start - 1 + q * block_size + j];
      if (!explored[j] && a == a1) {
        explored[j] = 1;
        ++ec.fresh[q];
      }
      if (!explored[j]) ++ec.never_explored;
    }
  }
  return ec;
}

struct TensionConfig {
  unsigned eps_exponent = 3;      // eps = 2^-3
  std::uint64_t base_time = 1000; // block of 10^3 cells
  unsigned passes = 16;           // frozen replays of the horizon
  std::optional<double> freeze_threshold;  // freeze once A_q / block_size < threshold
  unsigned cell_exponent = 0;     // 0: smallest resolution separating the realization
};

struct TensionReport {
  Time freeze_time = 0;
  std::uint64_t subphases = 0;
  unsigned cell_exponent = 0;
  std::uint64_t cells_with_bit = 0;  // block cells whose bit is 1
  std::uint64_t block_size = 0;
  double hindsight_fresh_mean = 0.0;  // mean of max(b, 3/4) over block cells
  double best_fixed_arm_forfeit = 0.0;  // hindsight minus best constant arm, per frozen step
  ExplorationCounts learner_counts;      // stochastic phase, learner under test
  ExplorationCounts per_instance_counts; // stochastic phase, per-instance learner
  double learner_replay_regret = 0.0;       // average over the whole replay
  double per_instance_replay_regret = 0.0;
  double per_instance_first_pass_regret = 0.0;
  std::vector<double> learner_curve;        // average regret at the end of each pass
  std::vector<double> per_instance_curve;
};

using LearnerFactory = std::function<std::unique_ptr<Learner>()>;

inline TensionReport tension_demo(const TensionConfig& cfg, const LearnerFactory& make_learner,
                                  const ReplicaStreams& streams) {
  DupBlockProcess::Params pp;
  pp.eps_exponent = cfg.eps_exponent;
  pp.base_time = cfg.base_time;
  pp.periods = 1;
  DupBlockProcess proc(pp, streams.process);
  const Time start = proc.period_start(0);
  const std::uint64_t k0 = proc.block_size(0);
  const std::uint64_t reps = proc.repetitions();
  const Time block_end = 2 * start - 1;

  std::vector<ProcessAnnotation> ann;
  auto contexts = take(proc, block_end, &ann);

  TensionReport rep;
  rep.block_size = k0;
  {
    std::vector<double> coords;
    for (Time t = start; t < start + k0; ++t) coords.push_back(contexts[t - 1].coord);
    rep.cell_exponent = cfg.cell_exponent ? cfg.cell_exponent : separating_cell_exponent(coords);
  }
  PartitionBernoulli::Params rp;
  rp.m = rep.cell_exponent;
  const auto bit_stream = streams.reward.derive("bits");

  auto run_stochastic = [&](Learner& learner) {
    PartitionBernoulli mech(rp, bit_stream);
    return run_episode(contexts, mech, learner, streams.reward, streams.learner);
  };

  auto learner = make_learner();
  const Trace stochastic = run_stochastic(*learner);

  // Freeze after the block, or after the first completed sub-phase whose
  // fresh-exploration rate falls below the threshold.
  rep.subphases = reps;
  if (cfg.freeze_threshold) {
    const auto full = exploration_counts(stochastic.actions, start, k0, reps, rp.a1);
    for (std::uint64_t q = 1; q <= reps; ++q) {
      if (static_cast<double>(full.fresh[q - 1]) < *cfg.freeze_threshold * static_cast<double>(k0)) {
        rep.subphases = q;
        break;
      }
    }
  }
  rep.freeze_time = start - 1 + rep.subphases * k0;
  if (rep.freeze_time < start + k0 - 1) throw ContractError("freeze before the first block completes");

  rep.learner_counts = exploration_counts(stochastic.actions, start, k0, rep.subphases, rp.a1);
  {
    PerInstanceExp3Ix pi(rp.arms);
    const Trace pt = run_stochastic(pi);
    rep.per_instance_counts = exploration_counts(pt.actions, start, k0, rep.subphases, rp.a1);
  }

  // Frozen deterministic environment on 1 .. freeze_time.
  const Time f = rep.freeze_time;
  const std::span<const ContextPoint> frozen_ctx(stochastic.contexts.data(), f);
  const std::span<const double> frozen_rewards(stochastic.reward_matrix.data(), f * stochastic.arms);

  std::unordered_map<std::uint64_t, ActionIndex> best;
  long double hind = 0.0L, arm1 = 0.0L, arm2 = 0.0L;
  for (Time t = 1; t <= f; ++t) {
    const auto row = stochastic.row(t);
    const ActionIndex b = row[rp.a1] > row[rp.a2] ? rp.a1 : rp.a2;
    best.emplace(contexts[t - 1].uid, b);
    hind += row[b];
    arm1 += row[rp.a1];
    arm2 += row[rp.a2];
  }
  rep.best_fixed_arm_forfeit = static_cast<double>((hind - std::max(arm1, arm2)) / static_cast<long double>(f));
  {
    long double fresh = 0.0L;
    for (Time t = start; t < start + k0; ++t) {
      const auto row = stochastic.row(t);
      fresh += std::max(row[rp.a1], row[rp.a2]);
      if (row[rp.a1] > 0.5) ++rep.cells_with_bit;
    }
    rep.hindsight_fresh_mean = static_cast<double>(fresh / static_cast<long double>(k0));
  }
  const Policy hindsight = lookup_policy("hindsight", std::move(best), rp.a2);

  auto replay = [&](Learner& l, std::vector<double>& curve) {
    const Trace tr = replay_frozen(frozen_ctx, frozen_rewards, stochastic.arms, cfg.passes, l, streams.learner.derive("replay"));
    std::vector<Time> ends;
    for (unsigned p = 1; p <= cfg.passes; ++p) ends.push_back(p * f);
    const auto r = regret_vs_policy(tr, hindsight, ends);
    for (std::size_t j = 0; j < ends.size(); ++j) curve.push_back(r.cum_regret[j] / static_cast<double>(ends[j]));
    return r.average_regret();
  };

  auto fresh_learner = make_learner();
  rep.learner_replay_regret = replay(*fresh_learner, rep.learner_curve);
  PerInstanceExp3Ix pi(rp.arms);
  rep.per_instance_replay_regret = replay(pi, rep.per_instance_curve);
  rep.per_instance_first_pass_regret = rep.per_instance_curve.front();
  return rep;
}

}  // namespace ncb
