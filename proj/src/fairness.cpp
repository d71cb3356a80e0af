#include "brace/fairness.hpp"

#include <algorithm>
#include <map>

#include "brace/demand.hpp"

namespace brace {

BundleValue order_value(const WeakOrder& order) {
  return [order](const Bundle& b) -> std::optional<double> {
    const auto k = order.class_of(b);
    if (!k) return std::nullopt;
    return -static_cast<double>(*k);
  };
}

bool weakly_prefers(const BundleValue& v, const Bundle& x, const Bundle& y) {
  const auto vx = v(x);
  const auto vy = v(y);
  if (!vx) return false;
  if (!vy) return true;
  return *vx >= *vy;
}

namespace {

bool triggered(const JefAgent& a, const JefAgent& b, JefTrigger trigger, const std::optional<PriceVector>& p) {
  if (trigger == JefTrigger::SetInclusion) return a.endowment.covers(b.endowment);
  return a.endowment.cost(p->values()) >= b.endowment.cost(p->values()) - 1e-12;
}

}  // namespace

JefReport jef_check(const std::vector<JefAgent>& agents, JefTrigger trigger, const std::optional<PriceVector>& prices) {
  if (trigger == JefTrigger::PriceValue && !prices) throw SpecError("price-valuation trigger needs prices");
  JefReport rep;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (i == j) continue;
      const auto& a = agents[i];
      const auto& b = agents[j];
      if (a.allocation.size() != b.allocation.size()) throw SpecError("allocation bundles differ in dimension");
      JefPair pr{i, j, triggered(a, b, trigger, prices), true};
      if (pr.triggered) {
        pr.pass = false;
        for (std::size_t k = 0; k < b.allocation.size() && !pr.pass; ++k) {
          pr.pass = weakly_prefers(a.value, a.allocation, b.allocation.without_one(k));
        }
      }
      rep.pass = rep.pass && pr.pass;
      rep.pairs.push_back(pr);
    }
  }
  return rep;
}

JefReport jef_check_lotteries(const std::vector<Lottery>& allocation, const std::vector<Bundle>& endowments,
                              const std::vector<WeakOrder>& orders) {
  const std::size_t n = allocation.size();
  if (endowments.size() != n || orders.size() != n) throw SpecError("lottery envy check needs matching profiles");
  JefReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    // Extend i's order with a last class holding every bundle it does not rank.
    auto classes = orders[i].classes();
    std::vector<Bundle> extra;
    for (std::size_t k = 0; k < n; ++k) {
      for (const auto& o : allocation[k].support()) {
        if (!orders[i].class_of(o.bundle) && std::find(extra.begin(), extra.end(), o.bundle) == extra.end()) {
          extra.push_back(o.bundle);
        }
      }
    }
    if (!extra.empty()) classes.push_back(extra);
    const WeakOrder extended(classes);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      JefPair pr{i, j, endowments[i].covers(endowments[j]), true};
      if (pr.triggered) {
        const auto d = fosd_compare(allocation[i], allocation[j], extended);
        pr.pass = d == Dominance::XDominates || d == Dominance::Equivalent;
      }
      rep.pass = rep.pass && pr.pass;
      rep.pairs.push_back(pr);
    }
  }
  return rep;
}

BundleValue principal_value(const std::vector<const WeakOrder*>& orders) {
  return [orders](const Bundle& y) -> std::optional<double> {
    double best = 0.0;
    std::vector<int> room(y.quantities());
    // Depth-first over identities: take nothing or one acceptable bundle that fits.
    auto rec = [&](auto&& self, std::size_t k, double acc) -> void {
      best = std::max(best, acc);
      if (k == orders.size()) return;
      self(self, k + 1, acc);
      const auto& ord = *orders[k];
      const std::size_t K = ord.class_count();
      for (std::size_t c = 0; c < K; ++c) {
        const double score = K == 1 ? 1.0 : static_cast<double>(K - 1 - c) / static_cast<double>(K - 1);
        for (const auto& b : ord.at(c)) {
          bool fits = true;
          for (std::size_t j = 0; j < b.size(); ++j) fits = fits && b[j] <= room[j];
          if (!fits) continue;
          for (std::size_t j = 0; j < b.size(); ++j) room[j] -= b[j];
          self(self, k + 1, acc + score);
          for (std::size_t j = 0; j < b.size(); ++j) room[j] += b[j];
        }
      }
    };
    rec(rec, 0, 0.0);
    return best;
  };
}

JefLiftReport jef_lift_check(const std::vector<Bundle>& allocation, const Economy& e, JefTrigger trigger,
                             const std::optional<PriceVector>& prices,
                             const std::map<std::string, BundleValue>& principal_orders) {
  if (allocation.size() != e.size()) throw SpecError("allocation is missing identities");
  JefLiftReport out;
  std::vector<JefAgent> identities;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto& t = e.identity(i).type;
    if (t.endowment().support().size() != 1) throw SpecError("fairness checks need deterministic endowments");
    identities.push_back({allocation[i], t.endowment().support().front().bundle, order_value(t.order())});
  }
  out.identity_level = jef_check(identities, trigger, prices);

  out.principals = e.principals();
  std::vector<JefAgent> principals;
  for (const auto& p : out.principals) {
    const auto owned = e.owned_by(p);
    Bundle x = Bundle::zero(e.goods()), en = Bundle::zero(e.goods());
    std::vector<const WeakOrder*> orders;
    for (std::size_t i : owned) {
      x = x + allocation[i];
      en = en + identities[i].endowment;
      orders.push_back(&e.identity(i).type.order());
    }
    const auto it = principal_orders.find(p);
    principals.push_back({x, en, it != principal_orders.end() ? it->second : principal_value(orders)});
  }
  out.principal_level = jef_check(principals, trigger, prices);
  return out;
}

namespace {

std::vector<Bundle> all_bundles(std::size_t m, int max_units) {
  std::vector<Bundle> out;
  std::vector<int> q(m, 0);
  while (true) {
    out.emplace_back(q);
    std::size_t j = 0;
    while (j < m && q[j] == max_units) q[j++] = 0;
    if (j == m) break;
    ++q[j];
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Strict orders (best first) over acceptable sets containing the endowment.
std::vector<std::pair<Bundle, std::vector<Bundle>>> all_types(const std::vector<Bundle>& bundles, std::size_t max_acc) {
  std::vector<std::pair<Bundle, std::vector<Bundle>>> out;
  for (const auto& e : bundles) {
    std::vector<Bundle> others;
    for (const auto& b : bundles) {
      if (b != e) others.push_back(b);
    }
    const std::size_t r = others.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
      std::vector<Bundle> set{e};
      for (std::size_t k = 0; k < r; ++k) {
        if (mask >> k & 1) set.push_back(others[k]);
      }
      if (set.size() > max_acc) continue;
      std::sort(set.begin(), set.end());
      do {
        out.emplace_back(e, set);
      } while (std::next_permutation(set.begin(), set.end()));
    }
  }
  return out;
}

// Restricted-growth strings: owner[i] <= 1 + max(owner[0..i-1]).
void partitions(std::size_t n, std::size_t max_blocks, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> cur(n, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t b = 0; b <= used && b < max_blocks; ++b) {
      cur[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  rec(rec, 0, 0);
}

}  // namespace

std::optional<JefCounterexample> find_jef_lift_counterexample(const JefSearchConfig& cfg, std::size_t* checked) {
  const auto bundles = all_bundles(cfg.goods, cfg.max_units);
  const auto types = all_types(bundles, cfg.max_acceptable);
  std::size_t count = 0;
  for (std::size_t n = 2; n <= cfg.max_identities; ++n) {
    std::vector<std::vector<std::size_t>> parts;
    partitions(n, cfg.max_principals, parts);
    // Keep ownership maps where some principal holds two identities and
    // there are at least two principals to compare.
    std::erase_if(parts, [](const std::vector<std::size_t>& o) {
      const std::size_t blocks = *std::max_element(o.begin(), o.end()) + 1;
      std::vector<int> sizes(blocks, 0);
      for (auto b : o) ++sizes[b];
      return blocks < 2 || *std::max_element(sizes.begin(), sizes.end()) < 2;
    });
    if (parts.empty()) continue;
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      // Supply of each good.
      std::vector<int> supply(cfg.goods, 0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cfg.goods; ++j) supply[j] += types[pick[i]].first[j];
      const bool usable = std::all_of(supply.begin(), supply.end(), [](int s) { return s > 0; });
      if (usable) {
        std::vector<WeakOrder> orders;
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<std::vector<Bundle>> cls;
          for (const auto& b : types[pick[i]].second) cls.push_back({b});
          orders.emplace_back(cls);
        }
        // Enumerate feasible allocations x_i in the acceptable set of i.
        std::vector<std::size_t> choice(n, 0);
        while (true) {
          std::vector<int> used(cfg.goods, 0);
          std::vector<Bundle> x(n);
          bool feasible = true;
          for (std::size_t i = 0; i < n && feasible; ++i) {
            x[i] = types[pick[i]].second[choice[i]];
            for (std::size_t j = 0; j < cfg.goods; ++j) feasible = feasible && (used[j] += x[i][j]) <= supply[j];
          }
          if (feasible) {
            std::vector<JefAgent> agents;
            for (std::size_t i = 0; i < n; ++i) agents.push_back({x[i], types[pick[i]].first, order_value(orders[i])});
            ++count;
            if (jef_check(agents).pass) {
              for (const auto& owner : parts) {
                EconomyDescription d;
                for (std::size_t j = 0; j < cfg.goods; ++j) d.goods.push_back({std::string(1, static_cast<char>('A' + j)), supply[j]});
                for (std::size_t i = 0; i < n; ++i) {
                  d.identities.push_back({std::to_string(i + 1), std::string(1, static_cast<char>('P' + owner[i])),
                                          IdentityType(Lottery::degenerate(types[pick[i]].first), orders[i])});
                }
                const auto e = build_economy(d);
                auto rep = jef_lift_check(x, e);
                if (rep.identity_level.pass && !rep.principal_level.pass) {
                  if (checked) *checked = count;
                  return JefCounterexample{std::move(d), x, std::move(rep), count};
                }
              }
            }
          }
          std::size_t i = 0;
          while (i < n && ++choice[i] == types[pick[i]].second.size()) choice[i++] = 0;
          if (i == n) break;
        }
      }
      std::size_t i = 0;
      while (i < n && ++pick[i] == types.size()) pick[i++] = 0;
      if (i == n) break;
    }
  }
  if (checked) *checked = count;
  return std::nullopt;
}

}  // namespace brace
