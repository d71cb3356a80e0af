#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brace/demand.hpp"
#include "brace/economy.hpp"
#include "brace/prices.hpp"

namespace brace {

// Fixed set of budget-relaxation profiles shared by every excess-demand
// evaluation that uses it (common random numbers).
class BudgetDraws {
 public:
  BudgetDraws(std::size_t identities, double delta, std::size_t draws, std::uint64_t seed);
  std::span<const BudgetProfile> profiles() const { return profiles_; }
  std::size_t identities() const { return n_; }

 private:
  std::size_t n_;
  std::vector<BudgetProfile> profiles_;
};

// Z(p) = mean over draws of aggregate expected demand minus capacity.
std::vector<double> excess_demand(const Economy& e, const PriceVector& p, const BudgetDraws& draws);
std::vector<double> excess_demand(const Economy& e, const PriceVector& p, std::size_t mc_draws,
                                  std::uint64_t seed);

// Largest violation of the delta-clearing conditions: Z_j - delta c_j > 0
// on any good, or |Z_j - delta c_j| on goods priced above tol_p.
double clearing_residual(const Economy& e, const PriceVector& p, std::span<const double> z, double tol_p);

struct SolverConfig {
  double eta0 = 0.1;
  double decay = 0.5;
  double growth = 2.0;  // step recovery after an accepted step, capped at eta0
  double tol = 1e-4;
  double tol_p = 1e-3;
  std::size_t max_iter = 100000;
  std::size_t restarts = 3;
  std::size_t mc_draws = 16;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> start;  // defaults to uniform
  bool record_trace = false;
};

struct EquilibriumResult {
  PriceVector prices;
  std::vector<Lottery> allocation;
  std::vector<double> excess;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t restarts_used = 0;
  std::vector<double> trace;  // residual after each accepted step of the returned run, when recorded
};

// Damped projected tatonnement p <- proj(p + eta (Z(p) - delta c) / n). A
// step that raises the clearing residual is rejected and eta is halved; an
// accepted step lets eta grow back toward eta0. When the
// first run fails, up to cfg.restarts runs from random starts follow; the
// best run is returned. Non-convergence is reported, not thrown.
EquilibriumResult solve_brace(const Economy& e, const SolverConfig& cfg);
EquilibriumResult solve_brace(const Economy& e, const SolverConfig& cfg, const BudgetDraws& draws);

// Random allocation at fixed prices: per-identity mixture of the demand
// lotteries over the draws.
std::vector<Lottery> allocation_at(const Economy& e, const PriceVector& p, const BudgetDraws& draws);

struct GoodClearing {
  double demand = 0.0;
  double target = 0.0;  // (1 + delta) c_j
  double slack = 0.0;   // target - demand
  bool priced = false;
  bool pass = false;
};

struct ClearingReport {
  std::vector<GoodClearing> goods;
  bool pass = true;
};

ClearingReport verify_clearing(const Economy& e, const EquilibriumResult& r, double tol, double tol_p = 1e-3);

// One element of an unbounded-Sybil economy sequence.
struct SybilStep {
  Economy economy;
  std::vector<std::string> sybils;
};

struct AuditResult {
  std::optional<std::size_t> first_violation;  // 1-based position in the sequence
  bool degenerate_beta = false;
};

// Smallest k with beta |S_k| > (1 + delta) c_j.
AuditResult feasibility_audit(std::span<const SybilStep> seq, double beta, std::size_t good, double delta);

struct BadRegionConfig {
  SolverConfig solver;
  std::size_t restarts = 3;
  double gamma_min = 1e-6;
  double spread_threshold = 0.05;
  std::size_t gamma_pairs = 24;
  double gamma_radius = 0.05;
  std::uint64_t seed = 7;
};

enum class BadReason { NonConvergence, GammaDegenerate, MultipleEquilibria };
const char* to_string(BadReason r);

struct BadRegionReport {
  bool in_bad_region = false;
  std::vector<BadReason> reasons;
  double gamma_estimate = 0.0;
  double price_spread = 0.0;
  std::optional<PriceVector> reference_prices;  // first converged restart
};

BadRegionReport detect_bad_region(const Economy& e, const BadRegionConfig& cfg);

}  // namespace brace
