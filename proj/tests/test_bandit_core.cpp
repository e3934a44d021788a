#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "ncb/bandit_core.hpp"

using namespace ncb;
using Catch::Approx;

TEST_CASE("EXP3.IX starts uniform with the anytime rates") {
  Exp3Ix e(3);
  const auto p = e.probabilities();
  for (double x : p) CHECK(x == Approx(1.0 / 3.0));
  CHECK(e.eta() == Approx(std::sqrt(std::log(3.0) / 3.0)));
  CHECK(e.gamma() == Approx(0.5 * e.eta()));
}

TEST_CASE("EXP3.IX update follows the implicit-exploration estimate") {
  Exp3Ix e(3);
  e.probabilities();
  e.update(1, 0.25);
  // (1 - 0.25) / (1/3 + gamma_1) and the softmax at eta_2, computed offline
  CHECK(e.loss_estimates()[1] == Approx(1.179417131167183).epsilon(1e-12));
  CHECK(e.loss_estimates()[0] == 0.0);
  const auto p = e.probabilities();
  CHECK(p[0] == Approx(0.38406879940387995).epsilon(1e-12));
  CHECK(p[1] == Approx(0.23186240119224014).epsilon(1e-12));
  CHECK(p[2] == Approx(0.38406879940387995).epsilon(1e-12));
}

TEST_CASE("EXP3.IX misuse") {
  CHECK_THROWS_AS(Exp3Ix(1), ContractError);
  Exp3Ix e(2);
  CHECK_THROWS_AS(e.update(0, 0.5), ContractError);
  e.probabilities();
  CHECK_THROWS_AS(e.update(2, 0.5), ContractError);
  CHECK_THROWS_AS(e.update(0, 1.5), ContractError);
}

TEST_CASE("EXP3.IX probabilities stay a distribution") {
  auto rng = RngStream::root(3);
  Exp3Ix e(5);
  for (int t = 0; t < 5000; ++t) {
    const auto p = e.probabilities();
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    REQUIRE(s == Approx(1.0).epsilon(1e-12));
    const auto a = e.sample(rng);
    e.update(a, a == 2 ? 0.9 : 0.1);
  }
  CHECK(e.probabilities()[2] > 0.8);
}

TEST_CASE("EXP3.IX regret bound value") {
  // 4 sqrt(K T ln K) + (2 sqrt(K T / ln K) + 1) ln(2 / delta), evaluated offline
  CHECK(exp3ix_regret_bound(2, 100000, 0.05) == Approx(5456.032063385019).epsilon(1e-12));
}

TEST_CASE("certificate measures regret against the best fixed arm") {
  const std::vector<double> r{1, 0, 1, 0, 0, 1, 1, 0};  // 4 steps x 2 arms
  const std::vector<ActionIndex> a{1, 1, 1, 0};
  const auto c = exp3ix_highprob_check(r, a, 2, 0.05);
  CHECK(c.regret == 1.0);  // arm 0 earns 3, learner earns 2
  CHECK(c.holds);
  CHECK_THROWS_AS(exp3ix_highprob_check(r, std::vector<ActionIndex>{0}, 2, 0.05), ContractError);
}

TEST_CASE("Hedge is a softmax of cumulative rewards") {
  Hedge h(3, 0.5);
  const std::vector<double> r{1.0, 0.0, 2.0};
  h.update(r);
  const auto p = h.probabilities();
  const double z = std::exp(0.5) + 1.0 + std::exp(1.0);
  CHECK(p[0] == Approx(std::exp(0.5) / z));
  CHECK(p[1] == Approx(1.0 / z));
  CHECK(p[2] == Approx(std::exp(1.0) / z));
  CHECK_THROWS_AS(Hedge(0, 1.0), ContractError);
  CHECK_THROWS_AS(Hedge(2, 0.0), ContractError);
  CHECK_THROWS_AS(h.update(std::vector<double>{1.0}), ContractError);
  CHECK_THROWS_AS(h.update(std::vector<double>{1.0, NAN, 0.0}), ContractError);
}

TEST_CASE("Hedge bound value") {
  const double eta = std::sqrt(8.0 * std::log(2.0) / 1e4);
  CHECK(hedge_regret_bound(2, 10000, eta) == Approx(58.870501125773735).epsilon(1e-12));
}

TEST_CASE("Hedge expected regret stays under its bound on random reward sequences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = RngStream::root(seed);
    const std::size_t n = 2 + seed % 5;
    const std::uint64_t T = 500;
    const double eta = std::sqrt(8.0 * std::log(static_cast<double>(n)) / T);
    Hedge h(n, eta);
    std::vector<double> total(n, 0.0);
    double got = 0.0;
    for (std::uint64_t t = 0; t < T; ++t) {
      std::vector<double> r(n);
      for (auto& x : r) x = rng.uniform01();
      const auto p = h.probabilities();
      for (std::size_t j = 0; j < n; ++j) {
        got += p[j] * r[j];
        total[j] += r[j];
      }
      h.update(r);
    }
    const double best = *std::max_element(total.begin(), total.end());
    REQUIRE(best - got <= hedge_regret_bound(n, T, eta) + 1e-9);
  }
}

TEST_CASE("EXPINF period offsets are sums of cubes") {
  std::uint64_t s = 0;
  for (std::uint64_t k = 1; k <= 200; ++k) {
    REQUIRE(expinf_period_offset(k) == s);
    s += k * k * k;
  }
  CHECK_THROWS_AS(expinf_period_offset(0), ContractError);
}

TEST_CASE("EXPINF restarts and grows its active prefix") {
  ExpInf e(3);
  auto rng = RngStream::root(1);
  std::vector<std::uint64_t> periods;
  for (int t = 1; t <= 40; ++t) {
    const auto j = e.select(rng);
    REQUIRE(j < e.active_experts());
    periods.push_back(e.period());
    e.update(0.5);
  }
  CHECK(periods[0] == 1);   // steps 1
  CHECK(periods[1] == 2);   // steps 2 .. 9
  CHECK(periods[8] == 2);
  CHECK(periods[9] == 3);   // steps 10 .. 36
  CHECK(periods[35] == 3);
  CHECK(periods[36] == 4);
  CHECK(e.active_experts() == 3);
  CHECK_THROWS_AS(e.update(0.5), ContractError);
}

TEST_CASE("EXPINF with an unbounded list activates k experts in period k") {
  ExpInf e;
  auto rng = RngStream::root(2);
  for (int t = 1; t <= 100; ++t) {
    e.select(rng);
    REQUIRE(e.active_experts() == e.period());
    e.update(1.0);
  }
}

TEST_CASE("EXPINF state hash is replayable") {
  auto run = [] {
    ExpInf e(4);
    auto rng = RngStream::root(77);
    for (int t = 0; t < 300; ++t) {
      const auto j = e.select(rng);
      e.update(j == 1 ? 1.0 : 0.0);
    }
    return e.state_hash();
  };
  CHECK(run() == run());
}
