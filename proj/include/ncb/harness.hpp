#pragma once

// Run loop: contexts from a process, full reward vectors from a mechanism,
// bandit feedback to the learner. The trace keeps the full reward matrix for
// evaluation; the learner only ever sees its own chosen rewards.

#include <cstdint>
#include <span>
#include <vector>

#include "ncb/core.hpp"
#include "ncb/processes.hpp"
#include "ncb/rewards.hpp"
#include "ncb/rng.hpp"

namespace ncb {

struct Trace {
  std::size_t arms = 0;
  std::vector<ContextPoint> contexts;
  std::vector<ActionIndex> actions;
  std::vector<double> rewards;        // reward of the chosen arm
  std::vector<double> reward_matrix;  // row-major, horizon x arms
  std::vector<LearnerInternals> internals;

  [[nodiscard]] Time horizon() const noexcept { return actions.size(); }
  // Reward vector at time t (1-based).
  [[nodiscard]] std::span<const double> row(Time t) const {
    return {reward_matrix.data() + (t - 1) * arms, arms};
  }
};

// The three per-replica streams: root(seed) / component / replica.
struct ReplicaStreams {
  RngStream process;
  RngStream reward;
  RngStream learner;

  static ReplicaStreams make(std::uint64_t seed, std::uint64_t replica) {
    const RngStream root = RngStream::root(seed);
    return {root.derive(stream_tag::kProcess).derive(replica), root.derive(stream_tag::kReward).derive(replica),
            root.derive(stream_tag::kLearner).derive(replica)};
  }
};

struct RunOptions {
  bool record_internals = false;
};

// Runs the learner over a fixed context sequence. The reward stream for step t
// is streams.reward.derive(t).
inline Trace run_episode(std::vector<ContextPoint> contexts, RewardMechanism& mechanism, Learner& learner,
                         const RngStream& reward_stream, const RngStream& learner_stream, RunOptions options = {}) {
  const std::size_t k = mechanism.arms();
  if (learner.arms() != k) throw ContractError("learner and reward mechanism disagree on K");
  Trace tr;
  tr.arms = k;
  const Time n = contexts.size();
  tr.contexts = std::move(contexts);
  tr.actions.reserve(n);
  tr.rewards.reserve(n);
  tr.reward_matrix.resize(n * k);
  if (options.record_internals) tr.internals.reserve(n);

  const std::span<const ContextPoint> ctx = tr.contexts;
  for (Time t = 1; t <= n; ++t) {
    const HistoryView h{ctx.first(t), std::span<const ActionIndex>(tr.actions), std::span<const double>(tr.rewards)};
    const ActionIndex a = learner.select(h, learner_stream);
    if (options.record_internals) tr.internals.push_back(learner.internals());

    const RewardView view(mechanism.tier(), t, ctx, std::span<const ActionIndex>(tr.actions),
                          std::span<const double>(tr.rewards));
    auto rng = reward_stream.derive(t);
    const std::span<double> row(tr.reward_matrix.data() + (t - 1) * k, k);
    mechanism.rewards(view, rng, row);

    learner.update(a, row[a]);
    tr.actions.push_back(a);
    tr.rewards.push_back(row[a]);
  }
  return tr;
}

inline Trace run_episode(ContextProcess& process, Time horizon, RewardMechanism& mechanism, Learner& learner,
                         const ReplicaStreams& streams, RunOptions options = {}) {
  if (horizon == 0) throw ContractError("horizon must be at least 1");
  return run_episode(take(process, horizon), mechanism, learner, streams.reward, streams.learner, options);
}

// Replays a frozen deterministic environment (contexts and full reward
// vectors) `passes` times back to back against a fresh learner.
inline Trace replay_frozen(std::span<const ContextPoint> contexts, std::span<const double> reward_matrix,
                           std::size_t arms, unsigned passes, Learner& learner, const RngStream& learner_stream) {
  if (passes == 0) throw ContractError("replay needs at least one pass");
  if (reward_matrix.size() != contexts.size() * arms) throw ContractError("frozen matrix does not match contexts");
  if (learner.arms() != arms) throw ContractError("learner and frozen environment disagree on K");
  Trace tr;
  tr.arms = arms;
  const Time h = contexts.size();
  const Time n = h * passes;
  tr.contexts.reserve(n);
  tr.reward_matrix.reserve(n * arms);
  for (unsigned p = 0; p < passes; ++p) {
    tr.contexts.insert(tr.contexts.end(), contexts.begin(), contexts.end());
    tr.reward_matrix.insert(tr.reward_matrix.end(), reward_matrix.begin(), reward_matrix.end());
  }
  tr.actions.reserve(n);
  tr.rewards.reserve(n);
  const std::span<const ContextPoint> ctx = tr.contexts;
  for (Time t = 1; t <= n; ++t) {
    const HistoryView hv{ctx.first(t), std::span<const ActionIndex>(tr.actions), std::span<const double>(tr.rewards)};
    const ActionIndex a = learner.select(hv, learner_stream);
    const double r = tr.reward_matrix[(t - 1) * arms + a];
    learner.update(a, r);
    tr.actions.push_back(a);
    tr.rewards.push_back(r);
  }
  return tr;
}

}  // namespace ncb
