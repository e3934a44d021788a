#include <catch_amalgamated.hpp>

#include <map>
#include <vector>

#include "ncb/rng.hpp"
#include "ncb/timescales.hpp"

using namespace ncb;

namespace {

// floor(2^u (1 + v 2^-i)) in exact integer arithmetic.
Time t_scale_oracle(unsigned i, std::uint64_t k) {
  const std::uint64_t u = k >> i;
  const std::uint64_t v = k % (std::uint64_t{1} << i);
  const unsigned __int128 num = (static_cast<unsigned __int128>(1) << u) * ((std::uint64_t{1} << i) + v);
  return static_cast<Time>(num >> i);
}

std::uint64_t period_scan(Time t, unsigned i) {
  std::uint64_t k = 0;
  while (t_scale_oracle(i, k + 1) <= t) ++k;
  return k;
}

// Random sequence over a small alphabet so duplicates are common.
std::vector<ContextPoint> dup_sequence(std::uint64_t seed, std::size_t n, std::uint64_t alphabet) {
  auto rng = RngStream::root(seed);
  std::vector<ContextPoint> out;
  for (std::size_t j = 0; j < n; ++j) {
    const auto u = 1 + rng.uniform_index(alphabet);
    out.push_back({static_cast<double>(u) / static_cast<double>(alphabet + 1), u});
  }
  return out;
}

}  // namespace

TEST_CASE("t_scale matches the exact floor formula") {
  for (unsigned i = 0; i <= 10; ++i) {
    for (std::uint64_t k = 0; k < (std::uint64_t{40} << i) && k < 50000; ++k) {
      REQUIRE(t_scale(i, k) == t_scale_oracle(i, k));
    }
  }
}

TEST_CASE("t_scale known values") {
  CHECK(t_scale(0, 0) == 1);
  CHECK(t_scale(0, 5) == 32);
  CHECK(t_scale(2, 9) == 5);    // u = 2, v = 1: 4 * 5/4
  CHECK(t_scale(3, 3) == 1);    // u = 0 collapses
  CHECK(t_scale(1, 7) == 12);   // u = 3, v = 1
  CHECK_THROWS_AS(t_scale(0, 64), OverflowError);
  CHECK_THROWS_AS(t_scale(kMaxScale + 1, 0), OverflowError);
}

TEST_CASE("period_of equals the linear-scan oracle") {
  for (unsigned i = 0; i <= 8; ++i) {
    for (Time t = 1; t <= 3000; ++t) REQUIRE(period_of(t, i) == period_scan(t, i));
  }
  CHECK_THROWS_AS(period_of(0, 1), ContractError);
}

TEST_CASE("periods tile time: start <= t < next start") {
  for (unsigned i = 0; i <= 6; ++i) {
    for (Time t = 1; t <= 5000; ++t) {
      const auto k = period_of(t, i);
      REQUIRE(t_scale(i, k) <= t);
      REQUIRE(t < t_scale(i, k + 1));
    }
  }
}

TEST_CASE("scale-(i+1) periods refine scale-i periods") {
  for (unsigned i = 0; i <= 6; ++i) {
    for (Time t = 1; t <= 5000; ++t) REQUIRE(period_start(t, i + 1) >= period_start(t, i));
  }
}

TEST_CASE("stage_of") {
  CHECK(stage_of(1) == 0);
  CHECK(stage_of(2) == 1);
  CHECK(stage_of(3) == 1);
  CHECK(stage_of(1024) == 10);
  CHECK_THROWS_AS(stage_of(0), ContractError);
}

TEST_CASE("tracker agrees with the direct first-appearance definition") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto seq = dup_sequence(seed, 600, 1 + seed * 7);
    FirstAppearanceTracker tr(6);
    for (Time t = 1; t <= seq.size(); ++t) {
      const auto mask = tr.observe(seq[t - 1]);
      for (unsigned i = 0; i <= 6; ++i) {
        REQUIRE(((mask >> i) & 1) == static_cast<std::uint64_t>(in_first_appearance_set(t, i, seq)));
      }
    }
  }
}

TEST_CASE("first-appearance sets are nested: T^i within T^(i+1)") {
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    const auto seq = dup_sequence(seed, 400, 2 + seed % 50);
    FirstAppearanceTracker tr(10);
    for (const auto& x : seq) {
      const auto mask = tr.observe(x);
      for (unsigned i = 0; i < 10; ++i) {
        if ((mask >> i) & 1) REQUIRE(((mask >> (i + 1)) & 1) == 1);
      }
    }
  }
}

TEST_CASE("paper schedule constants") {
  const auto s = PhaseSchedule::paper(3);
  CHECK(s.mode() == PhaseSchedule::Mode::kPaper);
  // eta_i 2^(i+5) rounded up: 106.57, 189.73, 301.42
  CHECK(s.u(1).value() == 107);
  CHECK(s.u(2).value() == 190);
  CHECK(s.u(3).value() == 302);
  CHECK_FALSE(s.u(4).has_value());
  CHECK(PhaseSchedule::eta(1) == Catch::Approx(1.6651092223153954));
}

TEST_CASE("paper mode rejects schedules that violate its constraints") {
  using M = PhaseSchedule::Mode;
  CHECK_THROWS_AS(PhaseSchedule::explicit_exponents({0, 2, 4}, M::kPaper), ContractError);
  CHECK_THROWS_AS(PhaseSchedule::explicit_exponents({0, 106}, M::kPaper), ContractError);
  CHECK_NOTHROW(PhaseSchedule::explicit_exponents({0, 107}, M::kPaper));
  CHECK_THROWS_AS(PhaseSchedule::explicit_exponents({1, 2}), ContractError);
  CHECK_THROWS_AS(PhaseSchedule::explicit_exponents({0, 2, 2}), ContractError);
  CHECK_THROWS_AS(PhaseSchedule::linear(0), ContractError);
}

TEST_CASE("phase lookup") {
  const auto s = PhaseSchedule::linear(2, 3);  // u = 0, 2, 4, 6
  CHECK(s.exponents().size() == 4);
  CHECK(s.phase(1) == 0);
  CHECK(s.phase(3) == 0);
  CHECK(s.phase(4) == 1);
  CHECK(s.phase(63) == 2);
  CHECK(s.phase(64) == 3);
  CHECK(s.phase(1 << 20) == 3);
  CHECK(s.reached(3, 64));
  CHECK_FALSE(s.reached(3, 63));
  CHECK_FALSE(s.reached(4, Time{1} << 40));
}

TEST_CASE("alg1 clock stays inside its stage") {
  const auto s = PhaseSchedule::linear(1);
  for (Time t = 1; t <= 4096; ++t) {
    const auto c = alg1_clock(t, s);
    REQUIRE(c.period < (std::uint64_t{1} << c.phase));
    REQUIRE(c.period_begin <= t);
    REQUIRE(t < c.period_end);
    REQUIRE(stage_of(c.period_begin) == c.stage);
    REQUIRE(c.period_end <= (Time{2} << c.stage));
  }
}

TEST_CASE("phase boundaries fall on stage boundaries") {
  const auto s = PhaseSchedule::explicit_exponents({0, 3, 5, 9});
  for (Time t = 2; t <= 4096; ++t) {
    if (s.phase(t) != s.phase(t - 1)) REQUIRE(std::has_single_bit(t));
  }
}

TEST_CASE("category_of_count") {
  CHECK(category_of_count(1) == 0);
  CHECK(category_of_count(3) == 0);
  CHECK(category_of_count(4) == 1);
  CHECK(category_of_count(15) == 1);
  CHECK(category_of_count(16) == 2);
  CHECK_THROWS_AS(category_of_count(0), ContractError);
}

TEST_CASE("category tracker counts within the period and resets") {
  CategoryTracker tr(PhaseSchedule::linear(1));
  // phase 0 until t = 2; scale-0 periods are [2^l, 2^(l+1))
  const ContextPoint x{0.5, 7};
  const auto e1 = tr.observe(x);
  CHECK(e1.count == 1);
  const auto e2 = tr.observe(x);  // t = 2: new stage, new period
  CHECK(e2.count == 1);
  const auto e3 = tr.observe(x);  // t = 3 shares the period [2, 3] at phase 1
  CHECK(e3.clock.period_begin == 3);
  CHECK(e3.count == 1);
  for (int j = 0; j < 10; ++j) tr.observe(x);
  CHECK(tr.t() == 13);
}

TEST_CASE("category bookkeeping identity on random sequences") {
  // Within every period, the number of times in category p equals the number
  // of (context, occurrence) pairs with occurrence in [4^p, 4^(p+1)).
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto seq = dup_sequence(seed, 2000, 3 + seed);
    CategoryTracker tr(PhaseSchedule::linear(1, 4));
    std::map<std::pair<Time, unsigned>, std::uint64_t> by_cat;
    std::map<Time, std::map<std::uint64_t, std::uint64_t>> occ;
    for (const auto& x : seq) {
      const auto e = tr.observe(x);
      ++by_cat[{e.clock.period_begin, e.category}];
      ++occ[e.clock.period_begin][x.uid];
    }
    std::map<std::pair<Time, unsigned>, std::uint64_t> expect;
    for (const auto& [begin, counts] : occ) {
      for (const auto& [uid, n] : counts) {
        for (std::uint64_t c = 1; c <= n; ++c) ++expect[{begin, category_of_count(c)}];
      }
    }
    REQUIRE(by_cat == expect);
  }
}
