#include <doctest.h>

#include <algorithm>

#include "brace/corpus.hpp"
#include "brace/solver.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace brace;
using namespace testing_support;

TEST_CASE("simplex projection matches bisection oracle") {
  Rng rng = make_rng(9);
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = 1 + uniform_index(rng, 7);
    std::vector<double> v(m);
    for (auto& x : v) x = 4.0 * uniform01(rng) - 2.0;
    const auto got = project_to_simplex(v);
    const auto want = oracle::bisect_projection(v);
    for (std::size_t j = 0; j < m; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-9).scale(1.0));
    CHECK_NOTHROW(PriceVector{got});
  }
}

namespace {

Economy smooth_economy(std::size_t n, std::uint64_t seed, double delta = 0.1) {
  CorpusTemplate t;
  Rng trng = make_rng(seed, 1);
  const auto space = make_type_space(t, trng);
  Rng rng = make_rng(seed, 2);
  return sample_economy(space, t.goods, n, delta, rng);
}

Economy self_demand_delta0(std::size_t n, std::size_t m) { return self_demand_economy(n, m, 0.0); }

}  // namespace

TEST_CASE("self-demand economy has zero excess demand") {
  const auto e = self_demand_delta0(6, 3);
  Rng rng = make_rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto z = excess_demand(e, PriceVector::random(3, rng), 4, 5);
    for (double v : z) CHECK(v == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("example economy at uniform prices demands C and D exactly") {
  const auto e = example1();
  const auto z = excess_demand(e, PriceVector::uniform(4), 8, 1);
  CHECK(z[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(z[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("doubling draws halves the Monte Carlo variance of Z") {
  const auto e = smooth_economy(30, 5);
  const PriceVector p = PriceVector::uniform(e.goods());
  auto variance = [&](std::size_t draws) {
    std::vector<std::vector<double>> zs;
    for (std::uint64_t r = 0; r < 30; ++r) zs.push_back(excess_demand(e, p, draws, 1000 + r * 7919 + draws));
    std::vector<double> var(e.goods(), 0.0);
    for (std::size_t j = 0; j < e.goods(); ++j) {
      double mean = 0.0;
      for (const auto& z : zs) mean += z[j] / 30.0;
      for (const auto& z : zs) var[j] += (z[j] - mean) * (z[j] - mean) / 29.0;
    }
    return var;
  };
  const auto v1 = variance(8), v2 = variance(16);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < e.goods(); ++j) {
    s1 += v1[j];
    s2 += v2[j];
  }
  REQUIRE(s1 > 0.0);
  const double ratio = s2 / s1;
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 0.7);
}

TEST_CASE("self-demand economy: solver returns its start") {
  const auto e = self_demand_delta0(4, 2);
  SolverConfig cfg;
  cfg.start = std::vector<double>{0.3, 0.7};
  const auto r = solve_brace(e, cfg);
  CHECK(r.converged);
  CHECK(r.residual == 0.0);
  CHECK(r.iterations == 0);
  CHECK(r.prices[0] == doctest::Approx(0.3));
  CHECK(r.prices[1] == doctest::Approx(0.7));
}

TEST_CASE("solver converges on smooth economies and the result clears") {
  SolverConfig cfg;
  cfg.record_trace = true;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const auto e = smooth_economy(40, s);
    const auto r = solve_brace(e, cfg);
    CHECK(r.converged);
    CHECK(r.residual <= cfg.tol);
    CHECK(verify_clearing(e, r, 10 * cfg.tol).pass);
    REQUIRE(r.trace.size() >= 2);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
    CHECK(r.allocation.size() == e.size());
    for (const auto& x : r.allocation) {
      double mass = 0.0;
      for (const auto& o : x.support()) mass += o.prob;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("solver config is validated") {
  const auto e = self_demand_delta0(2, 2);
  SolverConfig cfg;
  cfg.eta0 = 0.0;
  CHECK_THROWS_AS(solve_brace(e, cfg), SpecError);
  cfg.eta0 = 0.1;
  cfg.start = std::vector<double>{1.0};
  CHECK_THROWS_AS(solve_brace(e, cfg), SpecError);
}

TEST_CASE("verify_clearing on endowment and over-capacity allocations") {
  const auto e = self_demand_delta0(4, 2);
  EquilibriumResult r;
  r.prices = PriceVector::uniform(2);
  for (std::size_t i = 0; i < e.size(); ++i) r.allocation.push_back(e.identity(i).type.endowment());
  auto rep = verify_clearing(e, r, 1e-9);
  CHECK(rep.pass);
  for (const auto& g : rep.goods) CHECK(g.slack == doctest::Approx(0.0).scale(1.0));

  // delta = 0.1, c_0 = 2: push good 0 to c + 2 delta c.
  const auto e2 = self_demand_economy(4, 2, 0.1);
  EquilibriumResult r2;
  r2.prices = PriceVector::uniform(2);
  for (std::size_t i = 0; i < e2.size(); ++i) r2.allocation.push_back(e2.identity(i).type.endowment());
  r2.allocation[0] = Lottery({{B({1, 0}), 0.6}, {B({2, 0}), 0.4}});  // +0.4 = 2 delta c_0
  rep = verify_clearing(e2, r2, 1e-6);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.goods[0].pass);
  CHECK(rep.goods[0].slack == doctest::Approx(-0.2));
  CHECK_THROWS_AS(verify_clearing(self_demand_delta0(3, 2), r2, 1e-6), SpecError);
}

TEST_CASE("feasibility audit arithmetic") {
  const auto base = self_demand_economy(3, 2, 0.1);
  std::vector<SybilStep> seq;
  for (std::size_t k = 1; k <= 6; ++k) {
    SybilStep s{base, {}};
    for (std::size_t i = 0; i < k; ++i) s.sybils.push_back("s" + std::to_string(i));
    seq.push_back(s);
  }
  // c_1 = 1, delta = 0.1, beta = 0.5: first k with 0.5 k > 1.1 is 3.
  auto a = feasibility_audit(seq, 0.5, 1, 0.1);
  REQUIRE(a.first_violation);
  CHECK(*a.first_violation == 3);
  a = feasibility_audit(std::span(seq).first(2), 0.5, 1, 0.1);
  CHECK_FALSE(a.first_violation);
  a = feasibility_audit(seq, 0.0, 1, 0.1);
  CHECK_FALSE(a.first_violation);
  CHECK(a.degenerate_beta);
  CHECK_THROWS_AS(feasibility_audit(std::span<const SybilStep>(), 0.5, 1, 0.1), SpecError);
  // Monotone: every later (larger) step violates too.
  for (std::size_t k = 3; k <= 6; ++k) {
    const auto b = feasibility_audit(std::span(seq).subspan(k - 1), 0.5, 1, 0.1);
    REQUIRE(b.first_violation);
    CHECK(*b.first_violation == 1);
  }
}

TEST_CASE("bad region detection") {
  BadRegionConfig cfg;
  SUBCASE("self-demand economy has many equilibria") {
    const auto rep = detect_bad_region(self_demand_economy(6, 3, 0.0), cfg);
    CHECK(rep.in_bad_region);
    CHECK(std::find(rep.reasons.begin(), rep.reasons.end(), BadReason::MultipleEquilibria) != rep.reasons.end());
    CHECK(rep.price_spread > cfg.spread_threshold);
  }
  SUBCASE("smooth economy is clean") {
    const auto rep = detect_bad_region(smooth_economy(40, 3), cfg);
    CHECK_FALSE(rep.in_bad_region);
    CHECK(rep.reasons.empty());
    CHECK(rep.gamma_estimate > 0.0);
  }
  SUBCASE("one iteration does not converge") {
    cfg.solver.max_iter = 1;
    const auto rep = detect_bad_region(smooth_economy(40, 3), cfg);
    CHECK(rep.in_bad_region);
    CHECK(std::find(rep.reasons.begin(), rep.reasons.end(), BadReason::NonConvergence) != rep.reasons.end());
  }
  SUBCASE("fewer than three restarts is rejected") {
    cfg.restarts = 2;
    CHECK_THROWS_AS(detect_bad_region(smooth_economy(10, 3), cfg), SpecError);
  }
}
