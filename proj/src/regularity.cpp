#include "brace/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace brace {

std::vector<double> mean_excess_demand(const Economy& e, const PriceVector& p, const BudgetDraws& draws) {
  auto z = excess_demand(e, p, draws);
  const double n = static_cast<double>(std::max<std::size_t>(e.size(), 1));
  for (double& v : z) v /= n;
  return z;
}

namespace {

std::vector<double> tangent_step(std::size_t m, double radius, Rng& rng) {
  std::vector<double> d(m);
  double mean = 0.0;
  for (double& v : d) {
    v = uniform01(rng) - 0.5;
    mean += v;
  }
  mean /= static_cast<double>(m);
  for (double& v : d) v -= mean;
  const double norm = euclidean_norm(d);
  const double len = norm > 0.0 ? radius * uniform01(rng) / norm : 0.0;
  for (double& v : d) v *= len;
  return d;
}

PriceVector perturb(const PriceVector& c, double radius, Rng& rng) {
  auto d = tangent_step(c.size(), radius, rng);
  for (std::size_t j = 0; j < d.size(); ++j) d[j] += c[j];
  return PriceVector(project_to_simplex(d));
}

}  // namespace

std::vector<PricePair> sample_local_pairs(const PriceVector& center, double radius, std::size_t count, Rng& rng) {
  if (center.size() < 2) throw SpecError("price pairs need at least two goods");
  if (!(radius > 0.0)) throw SpecError("pair radius must be positive");
  std::vector<PricePair> out;
  out.reserve(count);
  while (out.size() < count) {
    auto p = perturb(center, radius, rng);
    auto q = perturb(center, radius, rng);
    if (euclidean_distance(p.values(), q.values()) > 1e-9) out.emplace_back(std::move(p), std::move(q));
  }
  return out;
}

double estimate_gamma(const Economy& e, std::span<const PricePair> pairs, const BudgetDraws& draws) {
  if (pairs.empty()) throw SpecError("gamma estimate needs at least one pair");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [p, q] : pairs) {
    const double d2 = std::pow(euclidean_distance(p.values(), q.values()), 2);
    if (!(d2 > 0.0)) throw SpecError("gamma estimate needs distinct price pairs");
    const auto zp = mean_excess_demand(e, p, draws);
    const auto zq = mean_excess_demand(e, q, draws);
    double inner = 0.0;
    for (std::size_t j = 0; j < zp.size(); ++j) inner += (zp[j] - zq[j]) * (p[j] - q[j]);
    best = std::min(best, -inner / d2);
  }
  return best;
}

double estimate_gamma(const Economy& e, std::span<const PricePair> pairs, std::size_t mc_draws, std::uint64_t seed) {
  return estimate_gamma(e, pairs, BudgetDraws(e.size(), e.delta(), mc_draws, seed));
}

LZEstimate estimate_LZ(const Economy& e, const PerturbationSampler& sampler, std::span<const PriceVector> p_grid,
                       std::size_t samples, std::size_t mc_draws, std::uint64_t seed) {
  if (p_grid.empty()) throw SpecError("L_Z estimate needs a price grid");
  LZEstimate out;
  const auto mu = empirical_distribution(e);
  // Draws keyed by economy size so equal-size perturbations share them.
  std::map<std::size_t, BudgetDraws> draws;
  auto draws_for = [&](std::size_t n) -> const BudgetDraws& {
    auto it = draws.find(n);
    if (it == draws.end()) it = draws.emplace(n, BudgetDraws(n, e.delta(), mc_draws, seed)).first;
    return it->second;
  };
  std::vector<std::vector<double>> base;
  for (const auto& p : p_grid) base.push_back(mean_excess_demand(e, p, draws_for(e.size())));
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng = make_rng(seed, 0x12000 + s);
    const Economy other = sampler(e, rng);
    const double w1 = w1_discrete(mu, empirical_distribution(other));
    if (!(w1 > 0.0)) continue;
    ++out.samples;
    for (std::size_t k = 0; k < p_grid.size(); ++k) {
      const auto z = mean_excess_demand(other, p_grid[k], draws_for(other.size()));
      std::vector<double> diff(z.size());
      for (std::size_t j = 0; j < z.size(); ++j) diff[j] = z[j] - base[k][j];
      const double ratio = euclidean_norm(diff) / w1;
      if (ratio > out.value) {
        out.value = ratio;
        out.witness_sample = s;
        out.witness_price = k;
        out.witness_w1 = w1;
      }
    }
  }
  if (out.samples == 0) throw SpecError("perturbation sampler produced only W1 = 0 pairs");
  return out;
}

PerturbationSampler single_retype_sampler(std::vector<IdentityType> pool) {
  if (pool.empty()) throw SpecError("retype pool is empty");
  return [pool = std::move(pool)](const Economy& e, Rng& rng) {
    auto d = e.description();
    const std::size_t i = uniform_index(rng, d.identities.size());
    const auto& t = pool[uniform_index(rng, pool.size())];
    auto& id = d.identities[i];
    id.type = make_type_with_endowment_fallback(id.type.endowment(), t.order());
    return build_economy(std::move(d), EndowmentCheck::Relaxed);
  };
}

}  // namespace brace
