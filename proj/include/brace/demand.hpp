#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "brace/economy.hpp"
#include "brace/prices.hpp"
#include "brace/rng.hpp"

namespace brace {

// v_p(x) = E[p . x].
double price_value(const PriceVector& p, const Lottery& x);

enum class Dominance { XDominates, YDominates, Equivalent, Incomparable };

const char* to_string(Dominance d);

// First-order stochastic dominance through upper-contour probabilities at
// every indifference class boundary.
Dominance fosd_compare(const Lottery& x, const Lottery& y, const WeakOrder& order);

struct BudgetProfile {
  std::vector<double> relaxations;
  double delta = 0.0;
};

// delta * Dirichlet(1, ..., 1).
BudgetProfile sample_budget_relaxations(std::size_t n, double delta, Rng& rng);

struct DemandResult {
  Lottery lottery;
  double expenditure = 0.0;
  std::size_t top_class_reached = 0;
};

// Greedy sd-lexicographic demand under budget p.E[endowment] + relaxation.
// Indifference classes are filled best-to-worst, each at the largest mass
// that still leaves the remainder affordable at the cheapest acceptable
// bundle; within a class the cheapest bundle is used (lexicographic order
// on cost ties).
DemandResult demand(const IdentityType& t, const PriceVector& p, double relaxation);

// Adds weight * E[demand] into `acc` without materializing the lottery.
void accumulate_demand(const IdentityType& t, const PriceVector& p, double relaxation, std::span<double> acc,
                       double weight = 1.0);

// Market value of capacity, p . c. Relaxation draws are scaled by this so
// that total budget equals (1 + delta) p . c.
double capacity_value(const Economy& e, const PriceVector& p);

// Per-identity demand at shared prices; relaxation i is b_i * (p . c).
std::vector<DemandResult> demand_profile(const Economy& e, const PriceVector& p, const BudgetProfile& b);

}  // namespace brace
