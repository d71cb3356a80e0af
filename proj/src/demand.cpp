#include "brace/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace brace {

double price_value(const PriceVector& p, const Lottery& x) {
  double v = 0.0;
  for (const auto& o : x.support()) v += o.prob * o.bundle.cost(p.values());
  return v;
}

const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::XDominates: return "x_dominates";
    case Dominance::YDominates: return "y_dominates";
    case Dominance::Equivalent: return "equivalent";
    case Dominance::Incomparable: return "incomparable";
  }
  return "?";
}

namespace {

std::vector<double> upper_contour(const Lottery& x, const WeakOrder& order) {
  std::vector<double> mass(order.class_count(), 0.0);
  for (const auto& o : x.support()) {
    auto k = order.class_of(o.bundle);
    if (!k) throw SpecError("lottery bundle " + to_string(o.bundle) + " is not ranked by the order");
    mass[*k] += o.prob;
  }
  std::partial_sum(mass.begin(), mass.end(), mass.begin());
  return mass;
}

}  // namespace

Dominance fosd_compare(const Lottery& x, const Lottery& y, const WeakOrder& order) {
  const auto fx = upper_contour(x, order);
  const auto fy = upper_contour(y, order);
  bool x_geq = true, y_geq = true;
  for (std::size_t k = 0; k < fx.size(); ++k) {
    if (fx[k] < fy[k] - kProbTol) x_geq = false;
    if (fy[k] < fx[k] - kProbTol) y_geq = false;
  }
  if (x_geq && y_geq) return Dominance::Equivalent;
  if (x_geq) return Dominance::XDominates;
  if (y_geq) return Dominance::YDominates;
  return Dominance::Incomparable;
}

BudgetProfile sample_budget_relaxations(std::size_t n, double delta, Rng& rng) {
  if (n == 0) throw SpecError("budget relaxation needs at least one identity");
  if (!(delta >= 0.0)) throw SpecError("delta must be non-negative");
  BudgetProfile b{std::vector<double>(n), delta};
  double s = 0.0;
  for (auto& v : b.relaxations) {
    v = -std::log(1.0 - uniform01(rng));
    s += v;
  }
  for (auto& v : b.relaxations) v = delta * v / s;
  return b;
}

namespace {

// Cheapest bundle in `bundles`, lexicographically smallest on cost ties.
std::pair<const Bundle*, double> cheapest(const std::vector<Bundle>& bundles, const PriceVector& p) {
  const Bundle* best = nullptr;
  double best_cost = 0.0;
  for (const auto& b : bundles) {  // bundles are sorted, so the first hit wins ties
    const double c = b.cost(p.values());
    if (best == nullptr || c < best_cost - 1e-15) {
      best = &b;
      best_cost = c;
    }
  }
  return {best, best_cost};
}

}  // namespace

namespace {

// Runs the greedy fill and reports each (bundle, mass) pick to `emit`.
// Returns {expenditure, top class}.
template <class Emit>
std::pair<double, std::size_t> greedy_fill(const IdentityType& t, const PriceVector& p, double relaxation,
                                           Emit&& emit) {
  if (t.acceptable().empty()) throw SpecError("identity has an empty acceptable set");
  if (t.acceptable().front().size() != p.size()) throw SpecError("price/type dimension mismatch");
  const double budget = price_value(p, t.endowment()) + relaxation;
  const auto [floor_bundle, q_min] = cheapest(t.acceptable(), p);

  double remaining = 1.0, spent = 0.0;
  std::size_t top = t.order().class_count();
  for (std::size_t k = 0; k < t.order().class_count() && remaining > 0.0; ++k) {
    const auto [rep, q_k] = cheapest(t.order().at(k), p);
    double mass = remaining;
    if (q_k > q_min) {
      const double headroom = budget - spent - remaining * q_min;
      mass = std::clamp(headroom / (q_k - q_min), 0.0, remaining);
    }
    if (mass <= 0.0) continue;
    emit(*rep, mass);
    spent += mass * q_k;
    remaining -= mass;
    top = std::min(top, k);
    if (remaining < 1e-15) remaining = 0.0;
  }
  if (remaining > 0.0) {
    emit(*floor_bundle, remaining);
    spent += remaining * q_min;
    if (auto k = t.order().class_of(*floor_bundle)) top = std::min(top, *k);
  }
  return {spent, top};
}

}  // namespace

DemandResult demand(const IdentityType& t, const PriceVector& p, double relaxation) {
  std::vector<Outcome> picks;
  const auto [spent, top] =
      greedy_fill(t, p, relaxation, [&](const Bundle& b, double mass) { picks.push_back({b, mass}); });
  // Clean up rounding so the lottery validates.
  double total = 0.0;
  for (const auto& o : picks) total += o.prob;
  for (auto& o : picks) o.prob /= total;
  return {Lottery(std::move(picks)), spent, top};
}

void accumulate_demand(const IdentityType& t, const PriceVector& p, double relaxation, std::span<double> acc,
                       double weight) {
  greedy_fill(t, p, relaxation, [&](const Bundle& b, double mass) {
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += weight * mass * b[j];
  });
}

double capacity_value(const Economy& e, const PriceVector& p) {
  double v = 0.0;
  for (std::size_t j = 0; j < e.goods(); ++j) v += p[j] * e.capacity()[j];
  return v;
}

std::vector<DemandResult> demand_profile(const Economy& e, const PriceVector& p, const BudgetProfile& b) {
  if (b.relaxations.size() != e.size()) throw SpecError("budget profile size does not match economy");
  const double scale = capacity_value(e, p);
  std::vector<DemandResult> out;
  out.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    out.push_back(demand(e.identity(i).type, p, b.relaxations[i] * scale));
  }
  return out;
}

}  // namespace brace
