#include "brace/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "brace/corpus.hpp"
#include "brace/parallel.hpp"

namespace brace {

namespace {

std::pair<double, double> mean_and_se(const std::vector<double>& x) {
  if (x.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (x.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

SplTable spl_curves(const EconomyGenerator& gen, const std::vector<IdentityType>& pool, const SplConfig& cfg) {
  if (pool.empty()) throw SpecError("deviation pool is empty");
  const CardinalUtility u;
  std::vector<SplSample> samples(cfg.n_list.size() * cfg.replications);
  parallel_for(samples.size(), cfg.threads, [&](std::size_t task) {
    const std::size_t n = cfg.n_list[task / cfg.replications];
    const std::size_t rep = task % cfg.replications;
    Rng rng = make_rng(cfg.seed, task);
    const Economy e = gen(n, rng);
    SplSample s{n, rep, 0.0, 0.0, 0};
    const auto solved = solve_economy(e, cfg.solver);

    // Single-identity misreports, each identity acting alone.
    for (std::size_t d = 0; d < cfg.identity_deviations; ++d) {
      const auto& ident = e.identity(uniform_index(rng, e.size()));
      // Draw a pool type whose anchored report actually differs.
      IdentityType report = ident.type;
      for (int tries = 0; tries < 16 && report.order() == ident.type.order(); ++tries) {
        report = anchored_misreport(ident.type, pool[uniform_index(rng, pool.size())]);
      }
      SybilAttack a{ident.principal, AttackKind::Misreport, {}, 0};
      a.replacements[ident.id] = {Replacement{1.0, report}};
      const auto o = evaluate_attack(solved, a, u, cfg.solver);
      if (!o.usable) {
        ++s.skipped;
        continue;
      }
      s.identity_gain = std::max(s.identity_gain, o.gain);
    }

    if (cfg.principal_share > 0.0) {
      const std::size_t k = std::min<std::size_t>(
          e.size(), static_cast<std::size_t>(std::ceil(cfg.principal_share * static_cast<double>(n) - 1e-9)));
      std::vector<std::size_t> ids(e.size());
      std::iota(ids.begin(), ids.end(), 0);
      for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[uniform_index(rng, i)]);
      ids.resize(k);
      const Economy coalition = reassign_principal(e, ids, "coalition");
      const SolvedEconomy base{coalition, solved.draws, solved.eq};
      const auto fam = random_misreport_family(coalition, "coalition", pool, cfg.principal_deviations, k,
                                              stream_seed(cfg.seed, 0xc0a1 + task));
      for (const auto& a : fam.candidates) {
        const auto o = evaluate_attack(base, a, u, cfg.solver);
        if (!o.usable) {
          ++s.skipped;
          continue;
        }
        s.principal_gain = std::max(s.principal_gain, o.gain);
      }
    }
    samples[task] = s;
  });

  SplTable t;
  t.samples = samples;
  for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
    std::vector<double> id, pr;
    SplRow row;
    row.n = cfg.n_list[k];
    for (std::size_t r = 0; r < cfg.replications; ++r) {
      const auto& s = samples[k * cfg.replications + r];
      id.push_back(s.identity_gain);
      pr.push_back(s.principal_gain);
      row.skipped += s.skipped;
    }
    std::tie(row.identity_mean, row.identity_se) = mean_and_se(id);
    std::tie(row.principal_mean, row.principal_se) = mean_and_se(pr);
    t.rows.push_back(row);
  }
  return t;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw SpecError("spearman needs two equal-length samples");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double fit_K(const SplTable& t, double eps) {
  double k = 0.0;
  for (const auto& r : t.rows) k = std::max(k, r.identity_mean * std::pow(static_cast<double>(r.n), 0.5 - eps));
  return k;
}

double deterrence_threshold(std::size_t k, std::size_t n, double K_eps, double eps, double L, double L_Z,
                            double gamma) {
  if (!(gamma > 0.0)) throw SpecError("deterrence threshold needs gamma > 0");
  if (n == 0) throw SpecError("deterrence threshold needs n >= 1");
  if (!(eps > 0.0 && eps < 0.5)) throw SpecError("deterrence threshold needs 0 < eps < 1/2");
  const double kk = static_cast<double>(k), nn = static_cast<double>(n);
  return kk * K_eps * std::pow(nn, -0.5 + eps) + L * L_Z / gamma * kk / nn;
}

std::size_t attack_size(const SybilAttack& a) {
  std::size_t k = a.fresh_identities;
  for (const auto& [id, parts] : a.replacements) {
    k += a.kind == AttackKind::Misreport ? 1 : (parts.empty() ? 0 : parts.size() - 1);
  }
  return k;
}

DeterrenceReport deterrence_check(const SolvedEconomy& base, const AttackFamily& fam, const CostFunction& cost,
                                  const CardinalUtility& u, const SolverConfig& cfg, std::size_t threads) {
  std::vector<std::optional<AttackOutcome>> out(fam.candidates.size());
  parallel_for(out.size(), threads, [&](std::size_t k) {
    auto o = evaluate_attack(base, fam.candidates[k], u, cfg);
    if (o.usable) out[k] = std::move(o);
  });
  DeterrenceReport rep;
  bool any = false;
  const std::size_t n = base.economy.size();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!out[k]) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    const double net = out[k]->gain - cost(attack_size(fam.candidates[k]), n);
    if (!any || net > rep.max_net_gain) {
      any = true;
      rep.max_net_gain = net;
      rep.se_at_max = out[k]->gain_se;
      rep.argmax = fam.candidates[k];
    }
  }
  rep.deterred = !any || rep.max_net_gain <= 2.0 * rep.se_at_max;
  return rep;
}

TailReport tail_bound_check(const TrialSampler& sampler, const CardinalUtility& u, const TailConfig& cfg) {
  if (cfg.trials < 30) throw SpecError("tail bound check needs at least 30 trials");
  TailReport rep;
  rep.trials.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    Rng rng = make_rng(cfg.seed, t);
    const auto setup = sampler(t, rng);
    BadRegionConfig bc = cfg.bad;
    bc.solver = cfg.solver;
    const auto bad = detect_bad_region(setup.economy, bc);
    const auto solved = solve_economy(setup.economy, cfg.solver);
    const auto o = evaluate_attack(solved, setup.attack, u, cfg.solver);
    rep.trials[t] = TailTrial{bad.in_bad_region, o.gain, o.alpha};
  });
  std::vector<double> gains;
  std::size_t bad = 0;
  for (const auto& t : rep.trials) {
    gains.push_back(t.gain);
    bad += t.bad ? 1 : 0;
    rep.alpha = std::max(rep.alpha, t.alpha);
  }
  rep.eps_hat = static_cast<double>(bad) / static_cast<double>(cfg.trials);
  std::tie(rep.mean_gain, rep.gain_se) = mean_and_se(gains);
  rep.rhs = cfg.C_U * rep.alpha * (1.0 - rep.eps_hat) + 2.0 * cfg.U_bar * rep.eps_hat;
  rep.satisfied = rep.mean_gain <= rep.rhs + 2.0 * rep.gain_se;
  return rep;
}

namespace {

std::vector<IdentityType> corpus_space(std::size_t goods, std::size_t types, double delta, TypeFamily family,
                                       std::uint64_t seed) {
  CorpusTemplate t;
  t.goods = goods;
  t.types = types;
  t.delta = delta;
  t.family = family;
  Rng rng = make_rng(seed, 0x7e5);
  return make_type_space(t, rng);
}

// Sampled economy where "M" owns the first k identities.
Economy principal_economy(const std::vector<IdentityType>& space, std::size_t goods, std::size_t n, double delta,
                          std::size_t k, Rng& rng) {
  const Economy e = sample_economy(space, goods, n, delta, rng);
  std::vector<std::size_t> ids(k);
  std::iota(ids.begin(), ids.end(), 0);
  return reassign_principal(e, ids, "M");
}

RegularityConfig principal_regularity(const RegularityConfig& base, const SolverConfig& solver,
                                      const std::vector<IdentityType>& pool, std::uint64_t seed) {
  RegularityConfig rc = base;
  rc.solver = solver;
  rc.principals = {"M"};
  rc.retype_pool = pool;
  rc.seed = seed;
  return rc;
}

}  // namespace

CorpusBoundSummary corpus_bound_check(const CorpusBoundConfig& cfg) {
  if (cfg.max_owned == 0 || cfg.max_owned > cfg.n) throw SpecError("max_owned must lie in [1, n]");
  const auto space = corpus_space(cfg.goods, cfg.types, cfg.delta, TypeFamily::Smooth, cfg.seed);
  const CardinalUtility u;
  CorpusBoundSummary out;
  out.trials.resize(cfg.economies);
  parallel_for(cfg.economies, cfg.threads, [&](std::size_t idx) {
    Rng rng = make_rng(cfg.seed, 1000 + idx);
    const std::size_t k = 1 + uniform_index(rng, cfg.max_owned);
    const Economy e = principal_economy(space, cfg.goods, cfg.n, cfg.delta, k, rng);
    CorpusBoundTrial tr;
    tr.index = idx;
    BadRegionConfig bc = cfg.bad;
    bc.solver = cfg.solver;
    const auto bad = detect_bad_region(e, bc);
    tr.reasons = bad.reasons;
    const auto solved = solve_economy(e, cfg.solver);
    if (!solved.eq.converged && std::find(tr.reasons.begin(), tr.reasons.end(), BadReason::NonConvergence) ==
                                    tr.reasons.end()) {
      tr.reasons.push_back(BadReason::NonConvergence);
    }
    const auto fam = random_misreport_family(e, "M", space, 1, k, stream_seed(cfg.seed, 2000 + idx));
    const auto& attack = fam.candidates.front();
    tr.alpha = infiltration_rate(attack, e);
    if (solved.eq.converged) {
      const auto est =
          estimate_regularity(solved, u, principal_regularity(cfg.regularity, cfg.solver, space, stream_seed(cfg.seed, 3000 + idx)));
      const auto o = evaluate_attack(solved, attack, u, cfg.solver);
      tr.price = check_price_bound(o, est);
      tr.welfare = check_welfare_bound(o, est);
      // A perturbed economy without a clearing price lies in the bad region too.
      if (!o.usable && std::find(tr.reasons.begin(), tr.reasons.end(), BadReason::NonConvergence) == tr.reasons.end()) {
        tr.reasons.push_back(BadReason::NonConvergence);
      }
    } else {
      tr.price.alpha = tr.welfare.alpha = tr.alpha;
    }
    tr.bad = !tr.reasons.empty();
    out.trials[idx] = std::move(tr);
  });
  for (const auto& t : out.trials) {
    if (t.bad) continue;
    ++out.clean;
    const bool p = t.price.usable && t.price.satisfied;
    const bool w = t.welfare.usable && t.welfare.satisfied;
    out.price_ok += p ? 1 : 0;
    out.welfare_ok += w ? 1 : 0;
    out.unflagged_violations += (!p || !w) ? 1 : 0;
  }
  return out;
}

TrialSampler mixed_tail_sampler(std::size_t n, std::size_t owned, std::size_t bad_every, std::uint64_t seed) {
  if (bad_every == 0) throw SpecError("bad_every must be positive");
  auto smooth = std::make_shared<const std::vector<IdentityType>>(corpus_space(4, 6, 0.1, TypeFamily::Smooth, seed));
  auto self = std::make_shared<const std::vector<IdentityType>>(corpus_space(4, 4, 0.1, TypeFamily::SelfDemand, seed));
  return [=](std::size_t trial, Rng& rng) {
    const auto& space = trial % bad_every == 0 ? *self : *smooth;
    const Economy e = principal_economy(space, 4, n, 0.1, owned, rng);
    SybilAttack a{"M", AttackKind::Misreport, {}, 0};
    for (const auto i : e.owned_by("M")) {
      const auto& ident = e.identity(i);
      IdentityType report = ident.type;
      for (int tries = 0; tries < 16 && report.order() == ident.type.order(); ++tries) {
        report = anchored_misreport(ident.type, (*smooth)[uniform_index(rng, smooth->size())]);
      }
      a.replacements[ident.id] = {Replacement{1.0, report}};
    }
    return TailTrialSetup{e, a};
  };
}

DeterrenceCorpusSummary deterrence_corpus(const DeterrenceCorpusConfig& cfg) {
  if (cfg.max_owned == 0 || cfg.max_owned > cfg.n) throw SpecError("max_owned must lie in [1, n]");
  const auto space = corpus_space(4, 6, cfg.delta, TypeFamily::Smooth, cfg.seed);
  const CardinalUtility u;
  DeterrenceCorpusSummary out;
  out.rows.resize(cfg.economies);
  parallel_for(cfg.economies, cfg.threads, [&](std::size_t idx) {
    Rng rng = make_rng(cfg.seed, 5000 + idx);
    const std::size_t k = 1 + uniform_index(rng, cfg.max_owned);
    const Economy e = principal_economy(space, 4, cfg.n, cfg.delta, k, rng);
    DeterrenceCorpusRow row;
    row.index = idx;
    const auto solved = solve_economy(e, cfg.solver);
    if (solved.eq.converged) {
      const auto est = estimate_regularity(
          solved, u, principal_regularity(cfg.regularity, cfg.solver, space, stream_seed(cfg.seed, 6000 + idx)));
      row.usable = est.gamma_hat > 0.0;
      if (row.usable) {
        const auto fam = random_misreport_family(e, "M", space, cfg.family_size, k, stream_seed(cfg.seed, 7000 + idx));
        const CostFunction threshold = [&](std::size_t kk, std::size_t nn) {
          return deterrence_threshold(kk, nn, cfg.K_hat, cfg.eps, est.L_hat, est.L_Z_hat, est.gamma_hat);
        };
        row.with_cost = deterrence_check(solved, fam, threshold, u, cfg.solver);
        row.zero_cost = deterrence_check(solved, fam, [](std::size_t, std::size_t) { return 0.0; }, u, cfg.solver);
      }
    }
    out.rows[idx] = std::move(row);
  });
  bool any = false;
  for (const auto& r : out.rows) {
    if (!r.usable) continue;
    ++out.usable;
    out.deterred_everywhere = out.deterred_everywhere && r.with_cost.deterred;
    if (r.zero_cost.evaluated > 0) {
      out.max_zero_cost_gain = any ? std::max(out.max_zero_cost_gain, r.zero_cost.max_net_gain) : r.zero_cost.max_net_gain;
      any = true;
    }
  }
  return out;
}

}  // namespace brace
