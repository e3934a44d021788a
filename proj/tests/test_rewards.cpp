#include <catch_amalgamated.hpp>

#include <map>
#include <vector>

#include "ncb/processes.hpp"
#include "ncb/rewards.hpp"

using namespace ncb;

namespace {

struct Stream {
  std::vector<ContextPoint> ctx;
  std::vector<ActionIndex> actions;
  std::vector<double> rewards;
};

std::vector<double> rewards_at(RewardMechanism& m, const Stream& s, Time t, RngStream rng) {
  std::vector<double> out(m.arms());
  const RewardView v(m.tier(), t, s.ctx, s.actions, s.rewards);
  m.rewards(v, rng, out);
  return out;
}

// A mechanism that claims a lower tier than it needs.
class Overreaching final : public RewardMechanism {
 public:
  explicit Overreaching(RewardTier t) : tier_(t) {}
  [[nodiscard]] RewardTier tier() const override { return tier_; }
  [[nodiscard]] std::size_t arms() const override { return 2; }
  [[nodiscard]] std::string name() const override { return "overreaching"; }

 protected:
  void compute(const RewardView& v, RngStream&, std::span<double> out) override {
    out[0] = v.all_contexts().size() > 3 ? 1.0 : 0.0;
    out[1] = 0.0;
  }

 private:
  RewardTier tier_;
};

Stream iid_stream(std::uint64_t seed, Time n) {
  IidUniformProcess p(RngStream::root(seed));
  Stream s;
  s.ctx = take(p, n);
  s.actions.assign(n, 0);
  s.rewards.assign(n, 0.0);
  return s;
}

}  // namespace

TEST_CASE("views hand out only what the tier allows") {
  const auto s = iid_stream(1, 10);
  const RewardView st(RewardTier::kStationary, 5, s.ctx, s.actions, s.rewards);
  CHECK(st.current() == s.ctx[4]);
  CHECK_THROWS_AS(st.t(), TierViolation);
  CHECK_THROWS_AS(st.contexts_so_far(), TierViolation);
  const RewardView on(RewardTier::kOnline, 5, s.ctx, s.actions, s.rewards);
  CHECK(on.t() == 5);
  CHECK(on.contexts_so_far().size() == 5);
  CHECK_THROWS_AS(on.all_contexts(), TierViolation);
  CHECK_THROWS_AS(on.past_actions(), TierViolation);
  const RewardView ad(RewardTier::kAdversarial, 5, s.ctx, s.actions, s.rewards);
  CHECK(ad.past_actions().size() == 4);
  CHECK(ad.all_contexts().size() == 10);
  CHECK_THROWS_AS(st.restricted(RewardTier::kOnline), TierViolation);
  CHECK_THROWS_AS(on.restricted(RewardTier::kStationary).t(), TierViolation);
  CHECK_THROWS_AS(RewardView(RewardTier::kStationary, 11, s.ctx, s.actions, s.rewards), ContractError);
}

TEST_CASE("an overreaching mechanism trips the guard") {
  const auto s = iid_stream(2, 10);
  Overreaching low(RewardTier::kOnline);
  CHECK_THROWS_AS(rewards_at(low, s, 3, RngStream::root(1)), TierViolation);
  Overreaching ok(RewardTier::kPrescient);
  CHECK(rewards_at(ok, s, 3, RngStream::root(1))[0] == 1.0);
}

TEST_CASE("stationary Bernoulli frequencies and optimal policy") {
  StationaryBernoulli m(1, 2, {0.2, 0.7, 0.9, 0.1});
  CHECK(m.mean(0.3, 1) == 0.7);
  CHECK(m.mean(0.8, 0) == 0.9);
  const auto opt = m.optimal_policy();
  CHECK(opt({0.3, 1}) == 1);
  CHECK(opt({0.8, 1}) == 0);
  Stream s;
  s.ctx.assign(1, {0.3, 1});
  s.actions.assign(1, 0);
  s.rewards.assign(1, 0.0);
  double sum = 0.0;
  const auto root = RngStream::root(3);
  for (int j = 0; j < 20000; ++j) sum += rewards_at(m, s, 1, root.derive(j))[1];
  CHECK(sum / 20000 == Catch::Approx(0.7).margin(0.015));
  CHECK_THROWS_AS(StationaryBernoulli(1, 2, {0.5}), ContractError);
  CHECK_THROWS_AS(StationaryBernoulli::uniform({0.5, 1.5}), ContractError);
}

TEST_CASE("partition Bernoulli pays bit, 3/4 and 0") {
  PartitionBernoulli::Params p;
  p.m = 3;
  p.arms = 3;
  PartitionBernoulli m(p, RngStream::root(4));
  Stream s;
  s.ctx = {{0.05, 1}, {0.30, 2}, {0.05, 1}, idle_context()};
  s.actions.assign(4, 0);
  s.rewards.assign(4, 0.0);
  const auto r1 = rewards_at(m, s, 1, RngStream::root(0));
  CHECK((r1[0] == 0.0 || r1[0] == 1.0));
  CHECK(r1[1] == 0.75);
  CHECK(r1[2] == 0.0);
  CHECK(rewards_at(m, s, 3, RngStream::root(0)) == r1);
  const auto idle = rewards_at(m, s, 4, RngStream::root(0));
  CHECK(idle == std::vector<double>{0.0, 0.0, 0.0});
  Stream clash;
  clash.ctx = {{0.01, 7}};
  clash.actions.assign(1, 0);
  clash.rewards.assign(1, 0.0);
  CHECK_THROWS_AS(rewards_at(m, clash, 1, RngStream::root(0)), ContractError);
}

TEST_CASE("partition bits are fair coins") {
  PartitionBernoulli::Params p;
  p.m = 20;
  PartitionBernoulli m(p, RngStream::root(5));
  int ones = 0;
  for (std::uint64_t c = 0; c < 20000; ++c) ones += m.bit({(c + 0.5) / 1048576.0 * 50, c + 1});
  CHECK(ones / 20000.0 == Catch::Approx(0.5).margin(0.015));
}

TEST_CASE("separating cell exponent") {
  CHECK(separating_cell_exponent({0.1, 0.6}) == 2);   // gap 0.5, need 2^-m <= 0.25
  CHECK(separating_cell_exponent({0.6, 0.1, 0.6}) == 2);
  CHECK(separating_cell_exponent({0.0, 0.1}) == 5);   // 2^-5 <= 0.05
  CHECK(separating_cell_exponent({0.3}) == 1);
}

TEST_CASE("phase switching delegates per phase and masks deleted phases") {
  std::vector<std::unique_ptr<RewardMechanism>> bases;
  bases.push_back(std::make_unique<StationaryBernoulli>(StationaryBernoulli::uniform({1.0, 0.0})));
  bases.push_back(std::make_unique<StationaryBernoulli>(StationaryBernoulli::uniform({0.0, 1.0})));
  bases.push_back(std::make_unique<StationaryBernoulli>(StationaryBernoulli::uniform({1.0, 1.0})));
  PhaseSwitching m(std::move(bases), {1, 4, 8}, {false, false, true});
  const auto s = iid_stream(6, 10);
  CHECK(rewards_at(m, s, 3, RngStream::root(0)) == std::vector<double>{1.0, 0.0});
  CHECK(rewards_at(m, s, 4, RngStream::root(0)) == std::vector<double>{0.0, 1.0});
  CHECK(rewards_at(m, s, 9, RngStream::root(0)) == std::vector<double>{0.0, 0.0});
  CHECK(m.phase_of(7) == 1);
  CHECK_THROWS_AS(m.phase_of(0), ContractError);
}

TEST_CASE("online duplicate zeroing matches a brute-force rule") {
  // Oracle: zero iff x_t occurred at some s < t with s >= period_start(t, p),
  // or x_t first occurred before the current block start.
  auto rng = RngStream::root(7);
  Stream s;
  for (int j = 0; j < 400; ++j) {
    const auto u = 1 + rng.uniform_index(40);
    s.ctx.push_back({static_cast<double>(u) / 41.0, u});
  }
  s.actions.assign(400, 0);
  s.rewards.assign(400, 0.0);
  const std::vector<Time> blocks{1, 100, 250};
  for (unsigned scale : {0u, 2u, 4u}) {
    OnlineDuplicateZeroing m(std::make_unique<StationaryBernoulli>(StationaryBernoulli::uniform({1.0, 1.0})), scale, blocks);
    for (Time t = 1; t <= 400; ++t) {
      const Time ps = period_start(t, scale);
      const Time bs = t >= 250 ? 250 : t >= 100 ? 100 : 1;
      bool zero = false;
      for (Time q = 1; q < t; ++q) {
        if (s.ctx[q - 1].uid != s.ctx[t - 1].uid) continue;
        if (q >= ps) zero = true;
      }
      for (Time q = 1; q < std::min(t, bs); ++q) {
        if (s.ctx[q - 1].uid == s.ctx[t - 1].uid) zero = true;
      }
      const auto r = rewards_at(m, s, t, RngStream::root(0));
      REQUIRE(r[0] == (zero ? 0.0 : 1.0));
    }
  }
}

TEST_CASE("tit-for-tat reads past actions") {
  TitForTat m(2);
  Stream s;
  s.ctx = {{0.1, 1}, {0.2, 2}};
  s.actions = {1, 0};
  s.rewards = {0.0, 0.0};
  CHECK(rewards_at(m, s, 1, RngStream::root(0)) == std::vector<double>{1.0, 0.0});
  CHECK(rewards_at(m, s, 2, RngStream::root(0)) == std::vector<double>{1.0, 0.0});
  CHECK(m.tier() == RewardTier::kAdversarial);
}

TEST_CASE("tier guard replay") {
  const auto s = iid_stream(8, 200);
  auto rng = RngStream::root(9);
  std::vector<ActionIndex> a(200), b(200);
  for (auto& x : a) x = rng.uniform_index(2);
  for (auto& x : b) x = rng.uniform_index(2);
  const MechanismFactory stationary = [] {
    return std::make_unique<StationaryBernoulli>(StationaryBernoulli::uniform({0.3, 0.6}));
  };
  const MechanismFactory zeroing = [] {
    return std::make_unique<OnlineDuplicateZeroing>(
        std::make_unique<StationaryBernoulli>(StationaryBernoulli::uniform({0.3, 0.6})), 1);
  };
  const MechanismFactory adversarial = [] { return std::make_unique<TitForTat>(2); };
  CHECK(tier_guard_replay(stationary, s.ctx, a, b, RngStream::root(1)) == GuardVerdict::kIdentical);
  CHECK(tier_guard_replay(zeroing, s.ctx, a, b, RngStream::root(1)) == GuardVerdict::kIdentical);
  CHECK(tier_guard_replay(adversarial, s.ctx, a, b, RngStream::root(1)) == GuardVerdict::kExempt);
}

TEST_CASE("mechanisms refuse malformed calls") {
  StationaryBernoulli m = StationaryBernoulli::uniform({0.5, 0.5});
  const auto s = iid_stream(10, 3);
  std::vector<double> out(3);
  auto rng = RngStream::root(0);
  const RewardView v(m.tier(), 1, s.ctx, s.actions, s.rewards);
  CHECK_THROWS_AS(m.rewards(v, rng, out), ContractError);
  std::vector<double> ok(2);
  const RewardView wrong(RewardTier::kOnline, 1, s.ctx, s.actions, s.rewards);
  CHECK_THROWS_AS(m.rewards(wrong, rng, ok), ContractError);
}
