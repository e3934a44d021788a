#pragma once

// Bandit primitives: EXP3.IX (adversarial bandit with implicit exploration),
// Hedge (full-information exponential weights) and EXPINF (restarted
// EXP3.IX over a growing prefix of a countable expert list).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncb/core.hpp"

namespace ncb {

namespace detail {

// exp(scale * v_a) / sum_b exp(scale * v_b), shifted by the max for stability.
inline void softmax_into(std::span<const double> values, double scale, std::vector<double>& out) {
  out.resize(values.size());
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, scale * v);
  double z = 0.0;
  for (std::size_t a = 0; a < values.size(); ++a) {
    out[a] = std::exp(scale * values[a] - top);
    z += out[a];
  }
  for (double& p : out) p /= z;
}

}  // namespace detail

// EXP3.IX with anytime rates eta_u = 2 gamma_u = sqrt(ln K / (K u)), where u
// is the index of the upcoming step. Losses are 1 - reward; the chosen arm's
// estimate grows by loss / (p_a + gamma_u).
class Exp3Ix {
 public:
  explicit Exp3Ix(std::size_t arms) : loss_hat_(arms, 0.0) {
    if (arms < 2) throw ContractError("EXP3.IX needs at least 2 arms");
  }

  [[nodiscard]] std::size_t arms() const noexcept { return loss_hat_.size(); }
  [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }

  [[nodiscard]] double eta() const noexcept {
    const double k = static_cast<double>(arms());
    return std::sqrt(std::log(k) / (k * static_cast<double>(steps_ + 1)));
  }
  [[nodiscard]] double gamma() const noexcept { return 0.5 * eta(); }

  // Sampling distribution for the upcoming step; cached until update().
  std::span<const double> probabilities() {
    if (!cached_) {
      const double rate = eta();
      detail::softmax_into(loss_hat_, -rate, probs_);
      cached_ = true;
    }
    return probs_;
  }

  ActionIndex sample(RngStream& rng) { return rng.categorical(probabilities()); }

  void update(ActionIndex arm, double reward) {
    if (!cached_) throw ContractError("EXP3.IX update before any select");
    if (arm >= arms()) throw ContractError("EXP3.IX arm out of range");
    checked_reward(reward);
    loss_hat_[arm] += (1.0 - reward) / (probs_[arm] + gamma());
    ++steps_;
    cached_ = false;
  }

  [[nodiscard]] std::span<const double> loss_estimates() const noexcept { return loss_hat_; }

  [[nodiscard]] std::uint64_t state_hash() const noexcept {
    std::uint64_t h = detail::hash_combine(0x3e3, steps_);
    for (double l : loss_hat_) h = detail::hash_double(h, l);
    return h;
  }

 private:
  std::vector<double> loss_hat_;
  std::vector<double> probs_;
  std::uint64_t steps_ = 0;
  bool cached_ = false;
};

// Right-hand side of the EXP3.IX high-probability regret bound:
// 4 sqrt(K T ln K) + (2 sqrt(K T / ln K) + 1) ln(2 / delta).
inline double exp3ix_regret_bound(std::size_t arms, std::uint64_t horizon, double delta) {
  const double k = static_cast<double>(arms);
  const double t = static_cast<double>(horizon);
  const double lk = std::log(k);
  return 4.0 * std::sqrt(k * t * lk) + (2.0 * std::sqrt(k * t / lk) + 1.0) * std::log(2.0 / delta);
}

struct RegretCertificate {
  double regret = 0.0;  // max over arms of sum_t r_t(a) - r_t(chosen_t)
  double bound = 0.0;
  bool holds = false;
};

// Realized regret against the best fixed arm, checked against the bound.
// rewards is row-major T x K; chosen has T entries.
inline RegretCertificate exp3ix_highprob_check(std::span<const double> rewards,
                                               std::span<const ActionIndex> chosen,
                                               std::size_t arms, double delta) {
  if (arms == 0 || rewards.size() != chosen.size() * arms) {
    throw ContractError("reward matrix does not match the action trace");
  }
  std::vector<double> per_arm(arms, 0.0);
  double got = 0.0;
  for (std::size_t t = 0; t < chosen.size(); ++t) {
    const double* row = rewards.data() + t * arms;
    for (std::size_t a = 0; a < arms; ++a) per_arm[a] += row[a];
    got += row[chosen[t]];
  }
  RegretCertificate c;
  c.regret = *std::max_element(per_arm.begin(), per_arm.end()) - got;
  c.bound = exp3ix_regret_bound(arms, chosen.size(), delta);
  c.holds = c.regret <= c.bound;
  return c;
}

// Exponential weights over N experts on cumulative estimated rewards.
// Inputs may exceed 1 (importance-weighted estimates); only NaN/inf is refused.
class Hedge {
 public:
  Hedge(std::size_t experts, double eta) : reward_hat_(experts, 0.0), eta_(eta) {
    if (experts == 0) throw ContractError("Hedge needs at least one expert");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ContractError("Hedge learning rate must be positive");
  }

  [[nodiscard]] std::size_t experts() const noexcept { return reward_hat_.size(); }
  [[nodiscard]] double eta() const noexcept { return eta_; }

  [[nodiscard]] std::vector<double> probabilities() const {
    std::vector<double> p;
    detail::softmax_into(reward_hat_, eta_, p);
    return p;
  }

  void update(std::span<const double> rewards) {
    if (rewards.size() != experts()) throw ContractError("Hedge update has wrong width");
    for (double r : rewards) {
      if (!std::isfinite(r)) throw ContractError("Hedge update with non-finite reward");
    }
    for (std::size_t j = 0; j < experts(); ++j) reward_hat_[j] += rewards[j];
  }

  [[nodiscard]] std::span<const double> cumulative() const noexcept { return reward_hat_; }

  // Overwrite the cumulative estimates (used for resets and tests).
  void set_cumulative(std::span<const double> values) {
    if (values.size() != experts()) throw ContractError("Hedge state has wrong width");
    std::copy(values.begin(), values.end(), reward_hat_.begin());
  }

 private:
  std::vector<double> reward_hat_;
  double eta_;
};

// Regret bound for Hedge with rewards in [0, 1]: ln(N) / eta + T eta / 8.
inline double hedge_regret_bound(std::size_t experts, std::uint64_t rounds, double eta) {
  return std::log(static_cast<double>(experts)) / eta + static_cast<double>(rounds) * eta / 8.0;
}

// EXPINF schedule: period k >= 1 covers global steps i(k)+1 ... i(k)+k^3 with
// i(k) = sum_{r<k} r^3 = (k (k-1) / 2)^2.
inline std::uint64_t expinf_period_offset(std::uint64_t k) {
  if (k == 0) throw ContractError("EXPINF periods start at 1");
  const std::uint64_t s = k * (k - 1) / 2;
  return s * s;
}

// EXPINF over an indexed expert list. Within period k a fresh EXP3.IX runs
// over experts 0 .. min(k, list_size) - 1; list_size == 0 means unbounded.
class ExpInf {
 public:
  explicit ExpInf(std::size_t list_size = 0) : list_size_(list_size) {}

  [[nodiscard]] std::uint64_t period() const noexcept { return period_; }
  [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }
  [[nodiscard]] std::size_t active_experts() const noexcept {
    return list_size_ == 0 ? period_ : std::min<std::size_t>(period_, list_size_);
  }

  // Expert for the upcoming step.
  std::size_t select(RngStream& rng) {
    if (pending_) throw ContractError("EXPINF select called twice");
    advance_period_if_needed();
    pending_ = true;
    if (!inner_) {
      last_ = 0;
    } else {
      last_ = inner_->sample(rng);
    }
    return last_;
  }

  void update(double reward) {
    if (!pending_) throw ContractError("EXPINF update without select");
    checked_reward(reward);
    if (inner_) inner_->update(last_, reward);
    pending_ = false;
    ++steps_;
  }

  // Probabilities of the current inner learner (size active_experts()).
  [[nodiscard]] std::vector<double> probabilities() {
    advance_period_if_needed();
    if (!inner_) return {1.0};
    auto p = inner_->probabilities();
    return {p.begin(), p.end()};
  }

  [[nodiscard]] std::uint64_t state_hash() const noexcept {
    std::uint64_t h = detail::hash_combine(0xe1f, steps_);
    h = detail::hash_combine(h, period_);
    if (inner_) h = detail::hash_combine(h, inner_->state_hash());
    return h;
  }

 private:
  void advance_period_if_needed() {
    // Step steps_+1 belongs to period k iff i(k) < steps_+1 <= i(k) + k^3.
    bool changed = period_ == 0;
    if (period_ == 0) period_ = 1;
    while (steps_ + 1 > expinf_period_offset(period_) + period_ * period_ * period_) {
      ++period_;
      changed = true;
    }
    if (changed) {
      const std::size_t n = active_experts();
      inner_.reset();
      if (n >= 2) inner_.emplace(n);
    }
  }

  std::size_t list_size_;
  std::uint64_t period_ = 0;
  std::uint64_t steps_ = 0;
  std::optional<Exp3Ix> inner_;
  std::size_t last_ = 0;
  bool pending_ = false;
};

}  // namespace ncb
