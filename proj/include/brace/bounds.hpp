#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brace/economy.hpp"
#include "brace/regularity.hpp"
#include "brace/solver.hpp"
#include "brace/sybil.hpp"

namespace brace {

enum class ScoreScale { Rank, Borda, Custom };

// Bernoulli scores per identity, consistent with its weak order. Rank:
// class k of K scores (K-1-k)/(K-1), a single class scores 1. Borda: share
// of acceptable bundles ranked strictly below. A bundle outside the
// acceptable set scores as the best acceptable bundle it covers (free
// disposal), or 0.
class CardinalUtility {
 public:
  explicit CardinalUtility(ScoreScale scale = ScoreScale::Rank) : scale_(scale) {}

  // Scores for one identity; must be in [0,1], equal within a class and
  // strictly decreasing across classes. Throws otherwise.
  void set_custom(const Identity& identity, std::map<Bundle, double> scores);

  ScoreScale scale() const { return scale_; }
  double score(const Identity& i, const Bundle& b) const;
  double expected(const Identity& i, const Lottery& x) const;
  static constexpr double upper_bound() { return 1.0; }

 private:
  double acceptable_score(const Identity& i, const Bundle& b) const;
  ScoreScale scale_;
  std::map<std::string, std::map<Bundle, double>> custom_;
};

// True when scores order every pair of acceptable bundles like the weak order.
bool respects_order(const CardinalUtility& u, const Identity& i);

struct PrincipalUtility {
  double value = 0.0;
  bool owns_nothing = false;
  std::vector<double> per_draw;  // utility under each budget draw
};

// Sum over the principal's identities of expected scores of their demand at
// p, averaged over the draws. `registry` lists principals that may own
// nothing in `e`; any other unknown principal throws.
PrincipalUtility principal_utility(const Economy& e, const std::string& principal, const PriceVector& p,
                                   const CardinalUtility& u, const BudgetDraws& draws,
                                   std::span<const std::string> registry = {});
PrincipalUtility principal_utility(const Economy& e, const std::string& principal, const PriceVector& p,
                                   const CardinalUtility& u, std::size_t mc_draws, std::uint64_t seed);

// An economy with its budget draws and equilibrium.
struct SolvedEconomy {
  Economy economy;
  BudgetDraws draws;
  EquilibriumResult eq;
};

SolvedEconomy solve_economy(const Economy& e, const SolverConfig& cfg);

struct AttackOutcome {
  SybilAttack attack;
  double alpha = 0.0;
  PriceVector base_prices;
  PriceVector attacked_prices;
  bool usable = false;  // both solves converged
  double price_shift = 0.0;
  double gain = 0.0;
  double gain_se = 0.0;  // Monte Carlo standard error over budget draws
};

// Solves the attacked economy (warm-started at the base prices) and
// measures the attacker's gain. Misreports are scored with the principal's
// true types at both price vectors; splits compare the attacked economy at
// its prices with the base economy at base prices.
AttackOutcome evaluate_attack(const SolvedEconomy& base, const SybilAttack& a, const CardinalUtility& u,
                              const SolverConfig& cfg);

struct RegularityConfig {
  SolverConfig solver;
  std::size_t gamma_pairs = 24;
  double radius = 0.1;
  std::size_t lz_samples = 24;
  std::size_t lz_grid = 4;
  std::uint64_t seed = 11;
  std::vector<IdentityType> retype_pool;  // defaults to the economy's own types
  std::vector<std::string> principals;    // defaults to all principals
};

struct RegularityEstimates {
  double L_Z_hat = 0.0;
  double gamma_hat = 0.0;
  std::map<std::string, double> L_p_hat;
  double L_hat = 0.0;
  std::size_t gamma_pairs = 0;
  std::size_t lz_samples = 0;
  std::size_t lp_pairs = 0;
  // L_hat * L_Z_hat / gamma_hat, or +inf when gamma_hat <= 0.
  double welfare_constant() const;
  double price_constant() const;
};

// max over local pairs of |U_p(p) - U_p(q)| / |p - q|.
double estimate_Lp(const Economy& e, const std::string& principal, const CardinalUtility& u,
                   std::span<const PricePair> pairs, const BudgetDraws& draws);

// All constants around the equilibrium in `solved`.
RegularityEstimates estimate_regularity(const SolvedEconomy& solved, const CardinalUtility& u,
                                        const RegularityConfig& cfg);

struct BoundReport {
  double observed = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  bool usable = false;
  double alpha = 0.0;
  RegularityEstimates constants_used;
};

BoundReport check_price_bound(const AttackOutcome& o, const RegularityEstimates& est);
BoundReport check_welfare_bound(const AttackOutcome& o, const RegularityEstimates& est);
BoundReport check_price_bound(const Economy& base, const SybilAttack& a, const RegularityEstimates& est,
                              const SolverConfig& cfg);
BoundReport check_welfare_bound(const Economy& base, const SybilAttack& a, const RegularityEstimates& est,
                                const CardinalUtility& u, const SolverConfig& cfg);

// Attack objective for attack_search built on evaluate_attack. Candidates
// whose solves fail are skipped.
AttackObjective gain_objective(const SolvedEconomy& base, const CardinalUtility& u, const SolverConfig& cfg);

}  // namespace brace
