#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "brace/bounds.hpp"
#include "brace/economy.hpp"
#include "brace/solver.hpp"
#include "brace/sybil.hpp"

namespace brace {

using EconomyGenerator = std::function<Economy(std::size_t n, Rng& rng)>;

struct SplConfig {
  std::vector<std::size_t> n_list{20, 50, 100, 200};
  std::size_t replications = 10;
  double principal_share = 0.3;  // <= 0 skips the principal curve
  std::size_t identity_deviations = 6;
  std::size_t principal_deviations = 6;
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct SplSample {
  std::size_t n = 0;
  std::size_t replication = 0;
  double identity_gain = 0.0;   // max over sampled single-identity misreports, floored at 0
  double principal_gain = 0.0;  // max over sampled coordinated deviations, floored at 0
  std::size_t skipped = 0;      // deviations whose solves failed
};

struct SplRow {
  std::size_t n = 0;
  double identity_mean = 0.0, identity_se = 0.0;
  double principal_mean = 0.0, principal_se = 0.0;
  std::size_t skipped = 0;
};

struct SplTable {
  std::vector<SplRow> rows;
  std::vector<SplSample> samples;
};

// Misreports retype identities to orders drawn from `pool`. The coalition
// holds ceil(share * n) identities of each replication economy.
SplTable spl_curves(const EconomyGenerator& gen, const std::vector<IdentityType>& pool, const SplConfig& cfg);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// max over rows of identity_mean * n^(1/2 - eps).
double fit_K(const SplTable& t, double eps);

// k K n^(-1/2 + eps) + (L L_Z / gamma) k / n.
double deterrence_threshold(std::size_t k, std::size_t n, double K_eps, double eps, double L, double L_Z,
                            double gamma);

using CostFunction = std::function<double(std::size_t k, std::size_t n)>;

struct DeterrenceReport {
  double max_net_gain = 0.0;
  double se_at_max = 0.0;
  bool deterred = true;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::optional<SybilAttack> argmax;
};

// Identities touched by an attack: retyped ones, extra split parts, fresh Sybils.
std::size_t attack_size(const SybilAttack& a);

// max over the family of gain - C_sys(k, n); deterred iff that is at most
// two Monte Carlo standard errors of the maximizing attack's gain.
DeterrenceReport deterrence_check(const SolvedEconomy& base, const AttackFamily& fam, const CostFunction& cost,
                                  const CardinalUtility& u, const SolverConfig& cfg, std::size_t threads = 1);

struct TailTrialSetup {
  Economy economy;
  SybilAttack attack;
};

using TrialSampler = std::function<TailTrialSetup(std::size_t trial, Rng& rng)>;

struct TailTrial {
  bool bad = false;
  double gain = 0.0;
  double alpha = 0.0;
};

struct TailConfig {
  std::size_t trials = 40;
  double C_U = 0.0;
  double U_bar = 1.0;
  SolverConfig solver;
  BadRegionConfig bad;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct TailReport {
  double eps_hat = 0.0;
  double mean_gain = 0.0;
  double gain_se = 0.0;
  double alpha = 0.0;  // largest alpha over trials
  double rhs = 0.0;
  bool satisfied = false;
  std::vector<TailTrial> trials;
};

// eps_hat = share of trials in the bad region; rhs = C_U alpha (1 - eps_hat)
// + 2 U_bar eps_hat; satisfied iff mean gain <= rhs + 2 standard errors.
TailReport tail_bound_check(const TrialSampler& sampler, const CardinalUtility& u, const TailConfig& cfg);

// Corpus of sampled economies in which principal "M" owns 1..max_owned
// identities and misreports some of them; constants are estimated per
// economy before the bounds are checked.
struct CorpusBoundConfig {
  std::size_t economies = 100;
  std::size_t n = 50;
  std::size_t goods = 4;
  std::size_t types = 6;
  double delta = 0.1;
  std::size_t max_owned = 5;  // alpha <= max_owned / n
  SolverConfig solver;
  RegularityConfig regularity;
  BadRegionConfig bad;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct CorpusBoundTrial {
  std::size_t index = 0;
  bool bad = false;
  std::vector<BadReason> reasons;
  double alpha = 0.0;
  BoundReport price;
  BoundReport welfare;
};

struct CorpusBoundSummary {
  std::vector<CorpusBoundTrial> trials;
  std::size_t clean = 0;
  std::size_t price_ok = 0;    // among clean trials
  std::size_t welfare_ok = 0;  // among clean trials
  std::size_t unflagged_violations = 0;  // violations on clean trials
  double price_rate() const { return clean ? static_cast<double>(price_ok) / static_cast<double>(clean) : 0.0; }
  double welfare_rate() const { return clean ? static_cast<double>(welfare_ok) / static_cast<double>(clean) : 0.0; }
};

CorpusBoundSummary corpus_bound_check(const CorpusBoundConfig& cfg);

// Mixed ensemble for the tail check: every `bad_every`-th trial samples a
// self-demand economy (flagged as bad), the rest smooth economies. Principal
// "M" owns `owned` identities and misreports all of them.
TrialSampler mixed_tail_sampler(std::size_t n, std::size_t owned, std::size_t bad_every, std::uint64_t seed);

struct DeterrenceCorpusConfig {
  std::size_t economies = 20;
  std::size_t n = 50;
  std::size_t max_owned = 5;
  std::size_t family_size = 6;
  double delta = 0.1;
  double K_hat = 0.0;
  double eps = 0.1;
  SolverConfig solver;
  RegularityConfig regularity;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct DeterrenceCorpusRow {
  std::size_t index = 0;
  bool usable = false;  // base converged and gamma_hat > 0
  DeterrenceReport with_cost;
  DeterrenceReport zero_cost;
};

struct DeterrenceCorpusSummary {
  std::vector<DeterrenceCorpusRow> rows;
  std::size_t usable = 0;
  bool deterred_everywhere = true;   // over usable rows, with the threshold cost
  double max_zero_cost_gain = 0.0;   // over usable rows
};

DeterrenceCorpusSummary deterrence_corpus(const DeterrenceCorpusConfig& cfg);

}  // namespace brace
