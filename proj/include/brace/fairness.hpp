#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "brace/economy.hpp"
#include "brace/prices.hpp"

namespace brace {

// Ordinal value of a bundle for one agent; nullopt marks an unacceptable
// bundle. Only comparisons between values matter.
using BundleValue = std::function<std::optional<double>(const Bundle&)>;

struct JefAgent {
  Bundle allocation;
  Bundle endowment;
  BundleValue value;
};

// Class-rank value over the acceptable set of `order` (higher is better).
BundleValue order_value(const WeakOrder& order);

// x weakly preferred to y. An unacceptable y is never envied while x is
// acceptable; an unacceptable x loses to everything.
bool weakly_prefers(const BundleValue& v, const Bundle& x, const Bundle& y);

enum class JefTrigger { SetInclusion, PriceValue };

struct JefPair {
  std::size_t i = 0, j = 0;
  bool triggered = false;
  bool pass = true;
};

struct JefReport {
  std::vector<JefPair> pairs;  // ordered pairs i != j
  bool pass = true;
};

// Justified envy-freeness up to one good: whenever e_i >= e_j (or
// p.e_i >= p.e_j) there is a good k with x_i weakly preferred by i to
// (x_j - e_k)^+.
JefReport jef_check(const std::vector<JefAgent>& agents, JefTrigger trigger = JefTrigger::SetInclusion,
                    const std::optional<PriceVector>& prices = std::nullopt);

// Lottery version: triggered pairs need x_i to dominate x_j stochastically
// under i's order, with bundles outside i's acceptable set ranked last.
JefReport jef_check_lotteries(const std::vector<Lottery>& allocation, const std::vector<Bundle>& endowments,
                              const std::vector<WeakOrder>& orders);

// Principal value of an aggregate bundle: best split of it into acceptable
// bundles of the principal's identities (free disposal), summing their
// rank scores.
BundleValue principal_value(const std::vector<const WeakOrder*>& orders);

struct JefLiftReport {
  JefReport identity_level;
  JefReport principal_level;
  std::vector<std::string> principals;
};

// Deterministic allocation x (one bundle per identity of e). Identity level
// uses each identity's own order; principal level uses summed bundles and
// endowments with principal_value (or `principal_orders` when given).
JefLiftReport jef_lift_check(const std::vector<Bundle>& allocation, const Economy& e,
                             JefTrigger trigger = JefTrigger::SetInclusion,
                             const std::optional<PriceVector>& prices = std::nullopt,
                             const std::map<std::string, BundleValue>& principal_orders = {});

struct JefSearchConfig {
  std::size_t goods = 2;
  int max_units = 1;            // per good in any bundle
  std::size_t max_identities = 4;
  std::size_t max_principals = 3;
  std::size_t max_acceptable = 3;
};

struct JefCounterexample {
  EconomyDescription economy;
  std::vector<Bundle> allocation;
  JefLiftReport report;
  std::size_t instances_checked = 0;
};

// Exhaustive search, smallest instances first, over deterministic
// endowments, strict orders over small acceptable sets, ownership maps and
// feasible allocations (sum x <= sum e). Returns the first allocation that
// is identity-level JEF1 but not principal-level JEF1.
std::optional<JefCounterexample> find_jef_lift_counterexample(const JefSearchConfig& cfg,
                                                              std::size_t* checked = nullptr);

}  // namespace brace
