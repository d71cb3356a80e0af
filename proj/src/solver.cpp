#include "brace/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "brace/regularity.hpp"

namespace brace {

BudgetDraws::BudgetDraws(std::size_t identities, double delta, std::size_t draws, std::uint64_t seed)
    : n_(identities) {
  if (draws == 0) throw SpecError("mc_draws must be at least 1");
  profiles_.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    Rng rng = make_rng(seed, d);
    profiles_.push_back(identities == 0 ? BudgetProfile{{}, delta}
                                        : sample_budget_relaxations(identities, delta, rng));
  }
}

std::vector<double> excess_demand(const Economy& e, const PriceVector& p, const BudgetDraws& draws) {
  if (draws.identities() != e.size()) throw SpecError("budget draws sized for a different economy");
  if (p.size() != e.goods()) throw SpecError("price dimension mismatch");
  std::vector<double> z(e.goods(), 0.0);
  const double scale = capacity_value(e, p);
  const double w = 1.0 / static_cast<double>(draws.profiles().size());
  for (const auto& prof : draws.profiles()) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      accumulate_demand(e.identity(i).type, p, prof.relaxations[i] * scale, z, w);
    }
  }
  for (std::size_t j = 0; j < z.size(); ++j) z[j] -= e.capacity()[j];
  return z;
}

std::vector<double> excess_demand(const Economy& e, const PriceVector& p, std::size_t mc_draws,
                                  std::uint64_t seed) {
  return excess_demand(e, p, BudgetDraws(e.size(), e.delta(), mc_draws, seed));
}

double clearing_residual(const Economy& e, const PriceVector& p, std::span<const double> z, double tol_p) {
  double r = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double gap = z[j] - e.delta() * e.capacity()[j];
    r = std::max(r, p[j] > tol_p ? std::abs(gap) : std::max(gap, 0.0));
  }
  return r;
}

std::vector<Lottery> allocation_at(const Economy& e, const PriceVector& p, const BudgetDraws& draws) {
  std::vector<std::map<Bundle, double>> mix(e.size());
  const double w = 1.0 / static_cast<double>(draws.profiles().size());
  for (const auto& prof : draws.profiles()) {
    const auto profile = demand_profile(e, p, prof);
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (const auto& o : profile[i].lottery.support()) mix[i][o.bundle] += w * o.prob;
    }
  }
  std::vector<Lottery> out;
  out.reserve(e.size());
  for (auto& m : mix) {
    std::vector<Outcome> outcomes;
    double total = 0.0;
    for (auto& [b, pr] : m) total += pr;
    for (auto& [b, pr] : m) outcomes.push_back({b, pr / total});
    out.emplace_back(std::move(outcomes));
  }
  return out;
}

namespace {

EquilibriumResult run_once(const Economy& e, const SolverConfig& cfg, const BudgetDraws& draws,
                           std::vector<double> start) {
  const std::size_t m = e.goods();
  PriceVector p(project_to_simplex(start));
  auto z = excess_demand(e, p, draws);
  double r = clearing_residual(e, p, z, cfg.tol_p);
  double eta = cfg.eta0;
  std::size_t it = 0;
  std::vector<double> v(m);
  std::vector<double> trace;
  if (cfg.record_trace) trace.push_back(r);
  const double per_identity = 1.0 / static_cast<double>(std::max<std::size_t>(e.size(), 1));
  while (it < cfg.max_iter && r > cfg.tol && eta > 1e-14) {
    ++it;
    for (std::size_t j = 0; j < m; ++j) v[j] = p[j] + eta * per_identity * (z[j] - e.delta() * e.capacity()[j]);
    PriceVector next(project_to_simplex(v));
    if (euclidean_distance(next.values(), p.values()) == 0.0) break;  // stationary, cannot improve
    auto z_next = excess_demand(e, next, draws);
    const double r_next = clearing_residual(e, next, z_next, cfg.tol_p);
    if (r_next <= r) {
      p = std::move(next);
      z = std::move(z_next);
      r = r_next;
      eta = std::min(cfg.eta0, eta * cfg.growth);
      if (cfg.record_trace) trace.push_back(r);
    } else {
      eta *= cfg.decay;
    }
  }
  EquilibriumResult out;
  out.prices = p;
  out.excess = std::move(z);
  out.residual = r;
  out.iterations = it;
  out.converged = r <= cfg.tol;
  out.trace = std::move(trace);
  return out;
}

}  // namespace

EquilibriumResult solve_brace(const Economy& e, const SolverConfig& cfg, const BudgetDraws& draws) {
  if (!(cfg.eta0 > 0.0) || !(cfg.tol > 0.0)) throw SpecError("solver needs eta0 > 0 and tol > 0");
  std::vector<double> start =
      cfg.start.value_or(std::vector<double>(e.goods(), 1.0 / static_cast<double>(e.goods())));
  if (start.size() != e.goods()) throw SpecError("start price has wrong dimension");
  EquilibriumResult best = run_once(e, cfg, draws, start);
  std::size_t used = 0;
  Rng rng = make_rng(cfg.seed, 0x5eed);
  while (!best.converged && used < cfg.restarts) {
    ++used;
    auto alt = run_once(e, cfg, draws, PriceVector::random(e.goods(), rng).vector());
    alt.iterations += best.iterations;
    if (alt.residual < best.residual) {
      best = std::move(alt);
    } else {
      best.iterations = alt.iterations;
    }
  }
  best.restarts_used = used;
  best.allocation = allocation_at(e, best.prices, draws);
  return best;
}

EquilibriumResult solve_brace(const Economy& e, const SolverConfig& cfg) {
  return solve_brace(e, cfg, BudgetDraws(e.size(), e.delta(), cfg.mc_draws, cfg.seed));
}

ClearingReport verify_clearing(const Economy& e, const EquilibriumResult& r, double tol, double tol_p) {
  if (r.allocation.size() != e.size()) throw SpecError("allocation sized for a different economy");
  ClearingReport rep;
  std::vector<double> total(e.goods(), 0.0);
  for (const auto& x : r.allocation) {
    const auto ex = x.expectation();
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += ex[j];
  }
  for (std::size_t j = 0; j < e.goods(); ++j) {
    GoodClearing g;
    g.demand = total[j];
    g.target = (1.0 + e.delta()) * e.capacity()[j];
    g.slack = g.target - g.demand;
    g.priced = r.prices[j] > tol_p;
    g.pass = g.demand <= g.target + tol && (!g.priced || std::abs(g.slack) <= tol);
    rep.pass = rep.pass && g.pass;
    rep.goods.push_back(g);
  }
  return rep;
}

AuditResult feasibility_audit(std::span<const SybilStep> seq, double beta, std::size_t good, double delta) {
  if (seq.empty()) throw SpecError("feasibility audit needs a non-empty sequence");
  AuditResult out;
  if (!(beta > 0.0)) {
    out.degenerate_beta = true;
    return out;
  }
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto& econ = seq[k].economy;
    if (good >= econ.goods()) throw SpecError("audit good out of range");
    const double cap = (1.0 + delta) * econ.capacity()[good];
    if (beta * static_cast<double>(seq[k].sybils.size()) > cap) {
      out.first_violation = k + 1;
      break;
    }
  }
  return out;
}

const char* to_string(BadReason r) {
  switch (r) {
    case BadReason::NonConvergence: return "non_convergence";
    case BadReason::GammaDegenerate: return "gamma_degenerate";
    case BadReason::MultipleEquilibria: return "multiple_equilibria";
  }
  return "?";
}

BadRegionReport detect_bad_region(const Economy& e, const BadRegionConfig& cfg) {
  if (cfg.restarts < 3) throw SpecError("bad-region detection needs at least 3 restarts");
  BadRegionReport rep;
  const BudgetDraws draws(e.size(), e.delta(), cfg.solver.mc_draws, cfg.solver.seed);
  Rng rng = make_rng(cfg.seed, 0xbad);
  std::vector<PriceVector> converged;
  bool failed = false;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    SolverConfig sc = cfg.solver;
    sc.restarts = 0;
    sc.start = PriceVector::random(e.goods(), rng).vector();
    const auto res = solve_brace(e, sc, draws);
    if (res.converged) {
      converged.push_back(res.prices);
    } else {
      failed = true;
    }
  }
  if (failed) rep.reasons.push_back(BadReason::NonConvergence);
  for (std::size_t a = 0; a < converged.size(); ++a) {
    for (std::size_t b = a + 1; b < converged.size(); ++b) {
      rep.price_spread = std::max(rep.price_spread, euclidean_distance(converged[a].values(), converged[b].values()));
    }
  }
  if (rep.price_spread > cfg.spread_threshold) rep.reasons.push_back(BadReason::MultipleEquilibria);

  const PriceVector center = converged.empty() ? PriceVector::uniform(e.goods()) : converged.front();
  if (!converged.empty()) rep.reference_prices = center;
  Rng pair_rng = make_rng(cfg.seed, 0x9a77a);
  const auto pairs = sample_local_pairs(center, cfg.gamma_radius, cfg.gamma_pairs, pair_rng);
  rep.gamma_estimate = estimate_gamma(e, pairs, draws);
  if (rep.gamma_estimate < cfg.gamma_min) rep.reasons.push_back(BadReason::GammaDegenerate);
  rep.in_bad_region = !rep.reasons.empty();
  return rep;
}

}  // namespace brace
