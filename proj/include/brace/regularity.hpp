#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "brace/economy.hpp"
#include "brace/prices.hpp"
#include "brace/solver.hpp"

namespace brace {

// Estimators work with per-identity excess demand Z/n, so that constants
// are comparable across economy sizes. The ratio L_Z / gamma is unaffected.
std::vector<double> mean_excess_demand(const Economy& e, const PriceVector& p, const BudgetDraws& draws);

using PricePair = std::pair<PriceVector, PriceVector>;

// Distinct pairs of prices within `radius` of `center` (after projection).
std::vector<PricePair> sample_local_pairs(const PriceVector& center, double radius, std::size_t count, Rng& rng);

// min over pairs of -<z(p) - z(q), p - q> / |p - q|^2. Negative values are
// returned as-is.
double estimate_gamma(const Economy& e, std::span<const PricePair> pairs, const BudgetDraws& draws);
double estimate_gamma(const Economy& e, std::span<const PricePair> pairs, std::size_t mc_draws, std::uint64_t seed);

// Draws a perturbed copy of the economy.
using PerturbationSampler = std::function<Economy(const Economy&, Rng&)>;

struct LZEstimate {
  double value = 0.0;
  std::size_t samples = 0;        // pairs with positive distance
  std::size_t witness_sample = 0;
  std::size_t witness_price = 0;
  double witness_w1 = 0.0;
};

// max over samples and grid prices of |z(p, mu) - z(p, nu)| / W1(mu, nu).
// Throws when every sample has W1 = 0.
LZEstimate estimate_LZ(const Economy& e, const PerturbationSampler& sampler, std::span<const PriceVector> p_grid,
                       std::size_t samples, std::size_t mc_draws, std::uint64_t seed);

// Sampler retyping one uniformly chosen identity to a type drawn from `pool`
// (endowment kept).
PerturbationSampler single_retype_sampler(std::vector<IdentityType> pool);

}  // namespace brace
