#include <doctest.h>

#include <numeric>

#include "brace/fairness.hpp"
#include "support.hpp"

using namespace brace;
using namespace testing_support;

namespace {

JefAgent agent(std::vector<int> x, std::vector<int> e, WeakOrder o) {
  return JefAgent{B(std::move(x)), B(std::move(e)), order_value(o)};
}

// Complete strictly monotone order over {0..u}^m from additive weights.
WeakOrder additive_order(std::size_t m, int u, const std::vector<double>& w) {
  std::vector<std::pair<double, Bundle>> all;
  std::vector<int> q(m, 0);
  while (true) {
    double v = 0.0;
    for (std::size_t j = 0; j < m; ++j) v += w[j] * q[j];
    all.emplace_back(-v, B(q));
    std::size_t j = 0;
    while (j < m && q[j] == u) q[j++] = 0;
    if (j == m) break;
    ++q[j];
  }
  std::sort(all.begin(), all.end());
  std::vector<std::vector<Bundle>> classes;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (k == 0 || all[k].first != all[k - 1].first) classes.emplace_back();
    classes.back().push_back(all[k].second);
  }
  return WeakOrder(classes);
}

}  // namespace

TEST_CASE("weak preference with unacceptable bundles") {
  const auto v = order_value(WeakOrder({{B({1, 0})}, {B({0, 1})}}));
  CHECK(weakly_prefers(v, B({1, 0}), B({0, 1})));
  CHECK_FALSE(weakly_prefers(v, B({0, 1}), B({1, 0})));
  CHECK(weakly_prefers(v, B({0, 1}), B({1, 1})));   // unacceptable y is never envied
  CHECK_FALSE(weakly_prefers(v, B({1, 1}), B({0, 1})));  // unacceptable x loses
  CHECK_FALSE(weakly_prefers(v, B({1, 1}), B({1, 1})));
}

TEST_CASE("jef checks") {
  SUBCASE("everyone keeps a top-ranked endowment") {
    std::vector<JefAgent> a{agent({1, 0}, {1, 0}, WeakOrder({{B({1, 0})}})),
                            agent({0, 1}, {0, 1}, WeakOrder({{B({0, 1})}, {B({1, 0})}}))};
    CHECK(jef_check(a).pass);
    CHECK(jef_check(a, JefTrigger::PriceValue, PriceVector::uniform(2)).pass);
  }
  SUBCASE("single agent is vacuous") {
    const auto r = jef_check({agent({0, 0}, {1, 1}, WeakOrder({{B({1, 1})}, {B({0, 0})}}))});
    CHECK(r.pass);
    CHECK(r.pairs.empty());
  }
  SUBCASE("identical endowments, envy not removable by one good") {
    // j holds 2A+2B; removing one unit leaves A+2B or 2A+B, both above i's A.
    const WeakOrder oi({{B({2, 2})}, {B({1, 2}), B({2, 1})}, {B({1, 0})}, {B({0, 0})}});
    const WeakOrder oj({{B({2, 2})}, {B({1, 0})}, {B({0, 0})}});
    std::vector<JefAgent> a{agent({1, 0}, {1, 1}, oi), agent({2, 2}, {1, 1}, oj)};
    const auto r = jef_check(a);
    CHECK_FALSE(r.pass);
    for (const auto& p : r.pairs) {
      CHECK(p.triggered);
      CHECK(p.pass == (p.i == 1));
    }
    // Brute force over k confirms.
    bool any = false;
    for (std::size_t k = 0; k < 2; ++k) any = any || weakly_prefers(order_value(oi), B({1, 0}), B({2, 2}).without_one(k));
    CHECK_FALSE(any);
  }
  SUBCASE("price trigger needs prices") {
    std::vector<JefAgent> a{agent({1, 0}, {1, 0}, WeakOrder({{B({1, 0})}}))};
    CHECK_THROWS_AS(jef_check(a, JefTrigger::PriceValue), SpecError);
  }
}

TEST_CASE("price and set-inclusion triggers agree on comparable endowments") {
  Rng rng = make_rng(12);
  for (int t = 0; t < 300; ++t) {
    // Chain of comparable endowments: e_0 <= e_1 <= e_2.
    std::vector<std::vector<int>> e{{0, 0, 0}};
    for (int k = 1; k < 3; ++k) {
      auto next = e.back();
      next[uniform_index(rng, 3)] += 1;
      e.push_back(next);
    }
    std::vector<JefAgent> a;
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<double> w{uniform01(rng), uniform01(rng), uniform01(rng)};
      const auto o = additive_order(3, 2, w);
      std::vector<int> x(3);
      for (auto& v : x) v = static_cast<int>(uniform_index(rng, 3));
      a.push_back(agent(x, e[i], o));
    }
    const auto s = jef_check(a, JefTrigger::SetInclusion);
    const auto p = jef_check(a, JefTrigger::PriceValue, PriceVector::uniform(3));
    REQUIRE(s.pairs.size() == p.pairs.size());
    for (std::size_t k = 0; k < s.pairs.size(); ++k) {
      // Strict inclusion chain: triggers coincide unless endowments are equal.
      CHECK(s.pairs[k].triggered == p.pairs[k].triggered);
      CHECK(s.pairs[k].pass == p.pairs[k].pass);
    }
  }
}

TEST_CASE("lottery envy check") {
  const WeakOrder o({{B({1, 0})}, {B({0, 1})}});
  const std::vector<Lottery> alloc{Lottery({{B({1, 0}), 0.5}, {B({0, 1}), 0.5}}), Lottery::degenerate(B({1, 0}))};
  const std::vector<Bundle> endow{B({1, 1}), B({0, 1})};
  const auto r = jef_check_lotteries(alloc, endow, {o, o});
  CHECK_FALSE(r.pass);  // agent 0 has the larger endowment and a dominated lottery
  const auto swapped = jef_check_lotteries({alloc[1], alloc[0]}, endow, {o, o});
  CHECK(swapped.pass);
  CHECK_THROWS_AS(jef_check_lotteries(alloc, endow, {o}), SpecError);
}

TEST_CASE("principal value") {
  const WeakOrder a({{B({1, 0})}, {B({0, 0})}});
  const WeakOrder b({{B({0, 1})}, {B({1, 0})}});
  const auto v = principal_value({&a, &b});
  CHECK(*v(B({1, 1})) == doctest::Approx(2.0));  // A to the first, B to the second
  CHECK(*v(B({1, 0})) == doctest::Approx(1.0));
  CHECK(*v(B({0, 0})) == doctest::Approx(0.0));
  CHECK(*v(B({2, 1})) == doctest::Approx(2.0));  // free disposal
}

TEST_CASE("lifting with one identity per principal") {
  // Strictly monotone complete orders: aggregation changes nothing.
  Rng rng = make_rng(13);
  for (int t = 0; t < 100; ++t) {
    EconomyDescription d;
    d.goods = {{"A", 3}, {"B", 3}};
    std::vector<Bundle> x;
    for (int i = 0; i < 3; ++i) {
      std::vector<int> e(2);
      for (auto& v : e) v = static_cast<int>(uniform_index(rng, 2));
      const auto o = additive_order(2, 3, {0.1 + uniform01(rng), 0.1 + uniform01(rng)});
      d.identities.push_back(ident(std::to_string(i), "P" + std::to_string(i), IdentityType(det(e), o)));
      x.push_back(B({static_cast<int>(uniform_index(rng, 2)), static_cast<int>(uniform_index(rng, 2))}));
    }
    const auto e = build_economy(d, EndowmentCheck::Relaxed);
    const auto r = jef_lift_check(x, e);
    CHECK(r.identity_level.pass == r.principal_level.pass);
  }
}

TEST_CASE("identical principals pass at the principal level") {
  EconomyDescription d;
  d.goods = {{"A", 2}, {"B", 2}};
  const WeakOrder o({{B({1, 1})}, {B({1, 0})}, {B({0, 1})}});
  for (int i = 0; i < 4; ++i) {
    const auto e = i % 2 == 0 ? std::vector<int>{1, 0} : std::vector<int>{0, 1};
    d.identities.push_back(ident(std::to_string(i), i < 2 ? "P" : "Q", IdentityType(det(e), o)));
  }
  const auto e = build_economy(d);
  const std::vector<Bundle> x{B({1, 0}), B({0, 1}), B({1, 0}), B({0, 1})};
  const auto r = jef_lift_check(x, e);
  CHECK(r.principal_level.pass);
  CHECK(r.principals == std::vector<std::string>{"P", "Q"});
  CHECK_THROWS_AS(jef_lift_check({x[0]}, e), SpecError);
}

TEST_CASE("exhaustive search finds a lifting counterexample") {
  JefSearchConfig cfg;
  cfg.max_identities = 3;
  std::size_t checked = 0;
  const auto ce = find_jef_lift_counterexample(cfg, &checked);
  REQUIRE(ce);
  CHECK(ce->report.identity_level.pass);
  CHECK_FALSE(ce->report.principal_level.pass);
  CHECK(checked == ce->instances_checked);
  // Independent re-check of the reported instance.
  const auto e = build_economy(ce->economy);
  const auto again = jef_lift_check(ce->allocation, e);
  CHECK(again.identity_level.pass);
  CHECK_FALSE(again.principal_level.pass);
  // Feasible: sum x <= sum e.
  std::vector<int> used(e.goods(), 0);
  for (const auto& b : ce->allocation)
    for (std::size_t j = 0; j < e.goods(); ++j) used[j] += b[j];
  for (std::size_t j = 0; j < e.goods(); ++j) CHECK(used[j] <= e.capacity()[j]);
}

TEST_CASE("search with a single identity finds nothing") {
  JefSearchConfig cfg;
  cfg.max_identities = 1;
  std::size_t checked = 99;
  CHECK_FALSE(find_jef_lift_counterexample(cfg, &checked));
  CHECK(checked == 0);
}
