#include "brace/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brace/demand.hpp"

namespace brace {

void CardinalUtility::set_custom(const Identity& identity, std::map<Bundle, double> scores) {
  const auto& order = identity.type.order();
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& cls : order.classes()) {
    std::optional<double> level;
    for (const auto& b : cls) {
      const auto it = scores.find(b);
      if (it == scores.end()) throw SpecError("custom scores miss a bundle of '" + identity.id + "'");
      if (it->second < 0.0 || it->second > 1.0) throw SpecError("custom scores must lie in [0,1]");
      if (level && *level != it->second) throw SpecError("custom scores differ inside an indifference class");
      level = it->second;
    }
    if (!(*level < prev)) throw SpecError("custom scores must decrease across classes");
    prev = *level;
  }
  custom_[identity.id] = std::move(scores);
}

double CardinalUtility::acceptable_score(const Identity& i, const Bundle& b) const {
  const auto& order = i.type.order();
  const auto k = order.class_of(b);
  if (!k) return -1.0;
  switch (scale_) {
    case ScoreScale::Rank: {
      const std::size_t K = order.class_count();
      return K == 1 ? 1.0 : static_cast<double>(K - 1 - *k) / static_cast<double>(K - 1);
    }
    case ScoreScale::Borda: {
      const std::size_t total = i.type.acceptable().size();
      if (total == 1) return 1.0;
      std::size_t below = 0;
      for (std::size_t c = *k + 1; c < order.class_count(); ++c) below += order.at(c).size();
      return static_cast<double>(below) / static_cast<double>(total - 1);
    }
    case ScoreScale::Custom: {
      const auto it = custom_.find(i.id);
      if (it == custom_.end()) throw SpecError("no custom scores for identity '" + i.id + "'");
      return it->second.at(b);
    }
  }
  return 0.0;
}

double CardinalUtility::score(const Identity& i, const Bundle& b) const {
  const double s = acceptable_score(i, b);
  if (s >= 0.0) return s;
  double best = 0.0;
  for (const auto& y : i.type.acceptable()) {
    if (b.covers(y)) best = std::max(best, acceptable_score(i, y));
  }
  return best;
}

double CardinalUtility::expected(const Identity& i, const Lottery& x) const {
  double v = 0.0;
  for (const auto& o : x.support()) v += o.prob * score(i, o.bundle);
  return v;
}

bool respects_order(const CardinalUtility& u, const Identity& i) {
  const auto& order = i.type.order();
  for (const auto& x : i.type.acceptable()) {
    for (const auto& y : i.type.acceptable()) {
      const auto kx = *order.class_of(x), ky = *order.class_of(y);
      const double sx = u.score(i, x), sy = u.score(i, y);
      if (kx < ky && !(sx > sy)) return false;
      if (kx == ky && sx != sy) return false;
      if (sx < 0.0 || sx > 1.0) return false;
    }
  }
  return true;
}

PrincipalUtility principal_utility(const Economy& e, const std::string& principal, const PriceVector& p,
                                   const CardinalUtility& u, const BudgetDraws& draws,
                                   std::span<const std::string> registry) {
  PrincipalUtility out;
  const auto owned = e.owned_by(principal);
  if (owned.empty()) {
    if (std::find(registry.begin(), registry.end(), principal) == registry.end()) {
      throw SpecError("unknown principal '" + principal + "'");
    }
    out.owns_nothing = true;
    out.per_draw.assign(draws.profiles().size(), 0.0);
    return out;
  }
  if (draws.identities() != e.size()) throw SpecError("budget draws sized for a different economy");
  const double scale = capacity_value(e, p);
  for (const auto& prof : draws.profiles()) {
    double v = 0.0;
    for (std::size_t i : owned) {
      const auto& ident = e.identity(i);
      v += u.expected(ident, demand(ident.type, p, prof.relaxations[i] * scale).lottery);
    }
    out.per_draw.push_back(v);
    out.value += v;
  }
  out.value /= static_cast<double>(out.per_draw.size());
  return out;
}

PrincipalUtility principal_utility(const Economy& e, const std::string& principal, const PriceVector& p,
                                   const CardinalUtility& u, std::size_t mc_draws, std::uint64_t seed) {
  return principal_utility(e, principal, p, u, BudgetDraws(e.size(), e.delta(), mc_draws, seed));
}

SolvedEconomy solve_economy(const Economy& e, const SolverConfig& cfg) {
  BudgetDraws draws(e.size(), e.delta(), cfg.mc_draws, cfg.seed);
  auto eq = solve_brace(e, cfg, draws);
  return {e, std::move(draws), std::move(eq)};
}

namespace {

double mean_se(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

}  // namespace

AttackOutcome evaluate_attack(const SolvedEconomy& base, const SybilAttack& a, const CardinalUtility& u,
                              const SolverConfig& cfg) {
  AttackOutcome out;
  out.attack = a;
  out.alpha = infiltration_rate(a, base.economy);
  out.base_prices = base.eq.prices;
  if (a.empty()) {
    out.attacked_prices = base.eq.prices;
    out.usable = base.eq.converged;
    return out;
  }
  const Economy attacked = apply_attack(base.economy, a);
  SolverConfig warm = cfg;
  warm.start = base.eq.prices.vector();
  const bool same_size = attacked.size() == base.economy.size();
  const BudgetDraws draws = same_size ? base.draws : BudgetDraws(attacked.size(), attacked.delta(), cfg.mc_draws, cfg.seed);
  const auto eq = solve_brace(attacked, warm, draws);
  out.attacked_prices = eq.prices;
  out.usable = base.eq.converged && eq.converged;
  out.price_shift = euclidean_distance(eq.prices.values(), base.eq.prices.values());

  const auto before = principal_utility(base.economy, a.principal, base.eq.prices, u, base.draws);
  const auto after = a.kind == AttackKind::Misreport
                         ? principal_utility(base.economy, a.principal, eq.prices, u, base.draws)
                         : principal_utility(attacked, a.principal, eq.prices, u, draws);
  out.gain = after.value - before.value;
  std::vector<double> diff(before.per_draw.size());
  for (std::size_t d = 0; d < diff.size(); ++d) diff[d] = after.per_draw[d] - before.per_draw[d];
  out.gain_se = mean_se(diff);
  return out;
}

double RegularityEstimates::price_constant() const {
  return gamma_hat > 0.0 ? L_Z_hat / gamma_hat : std::numeric_limits<double>::infinity();
}

double RegularityEstimates::welfare_constant() const {
  return gamma_hat > 0.0 ? L_hat * L_Z_hat / gamma_hat : std::numeric_limits<double>::infinity();
}

double estimate_Lp(const Economy& e, const std::string& principal, const CardinalUtility& u,
                   std::span<const PricePair> pairs, const BudgetDraws& draws) {
  double best = 0.0;
  for (const auto& [p, q] : pairs) {
    const double d = euclidean_distance(p.values(), q.values());
    if (!(d > 0.0)) throw SpecError("utility Lipschitz estimate needs distinct pairs");
    const double up = principal_utility(e, principal, p, u, draws).value;
    const double uq = principal_utility(e, principal, q, u, draws).value;
    best = std::max(best, std::abs(up - uq) / d);
  }
  return best;
}

RegularityEstimates estimate_regularity(const SolvedEconomy& solved, const CardinalUtility& u,
                                        const RegularityConfig& cfg) {
  const Economy& e = solved.economy;
  RegularityEstimates est;
  Rng rng = make_rng(cfg.seed, 0x7e9);
  const auto pairs = sample_local_pairs(solved.eq.prices, cfg.radius, cfg.gamma_pairs, rng);
  est.gamma_hat = estimate_gamma(e, pairs, solved.draws);
  est.gamma_pairs = pairs.size();

  auto pool = cfg.retype_pool;
  if (pool.empty()) {
    const auto mu = empirical_distribution(e);
    for (const auto& [t, w] : mu.atoms()) pool.push_back(t);
  }
  std::vector<PriceVector> grid{solved.eq.prices};
  for (std::size_t k = 0; k + 1 < cfg.lz_grid && k < pairs.size(); ++k) grid.push_back(pairs[k].first);
  const auto lz = estimate_LZ(e, single_retype_sampler(pool), grid, cfg.lz_samples, cfg.solver.mc_draws, cfg.solver.seed);
  est.L_Z_hat = lz.value;
  est.lz_samples = lz.samples;

  const auto principals = cfg.principals.empty() ? e.principals() : cfg.principals;
  for (const auto& p : principals) {
    const double l = estimate_Lp(e, p, u, pairs, solved.draws);
    est.L_p_hat[p] = l;
    est.L_hat = std::max(est.L_hat, l);
  }
  est.lp_pairs = pairs.size();
  return est;
}

namespace {

BoundReport make_report(double observed, double bound, const AttackOutcome& o, const RegularityEstimates& est) {
  BoundReport r;
  r.observed = observed;
  r.bound = bound;
  r.satisfied = observed <= bound + 1e-6;
  r.usable = o.usable && est.gamma_hat > 0.0;
  r.alpha = o.alpha;
  r.constants_used = est;
  return r;
}

}  // namespace

BoundReport check_price_bound(const AttackOutcome& o, const RegularityEstimates& est) {
  const double bound = o.alpha == 0.0 ? 0.0 : est.price_constant() * o.alpha;
  return make_report(o.price_shift, bound, o, est);
}

BoundReport check_welfare_bound(const AttackOutcome& o, const RegularityEstimates& est) {
  const double bound = o.alpha == 0.0 ? 0.0 : est.welfare_constant() * o.alpha;
  return make_report(o.gain, bound, o, est);
}

BoundReport check_price_bound(const Economy& base, const SybilAttack& a, const RegularityEstimates& est,
                              const SolverConfig& cfg) {
  const auto solved = solve_economy(base, cfg);
  return check_price_bound(evaluate_attack(solved, a, CardinalUtility(), cfg), est);
}

BoundReport check_welfare_bound(const Economy& base, const SybilAttack& a, const RegularityEstimates& est,
                                const CardinalUtility& u, const SolverConfig& cfg) {
  const auto solved = solve_economy(base, cfg);
  return check_welfare_bound(evaluate_attack(solved, a, u, cfg), est);
}

AttackObjective gain_objective(const SolvedEconomy& base, const CardinalUtility& u, const SolverConfig& cfg) {
  return [&base, u, cfg](const SybilAttack& a) -> std::optional<double> {
    const auto o = evaluate_attack(base, a, u, cfg);
    if (!o.usable) return std::nullopt;
    return o.gain;
  };
}

}  // namespace brace
