#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "brace/economy.hpp"
#include "brace/solver.hpp"

namespace brace {

// Splits replace an identity by parts "<id>a", "<id>b", ... each carrying
// share * endowment; endowment-only bundles are appended to the bottom of
// each part's order. Misreports swap the order of each listed identity and
// keep its endowment. Throws on shares not summing to 1, identities owned
// by another principal, or unknown ids.
Economy apply_attack(const Economy& e, const SybilAttack& a);

// Retypes identities of `principal`. Endowments are kept unless
// `misreport_endowments` is set, in which case the new type's endowment is
// used (the result may then be unbalanced).
Economy coordinated_misreport(const Economy& e, const std::string& principal,
                              const std::map<std::string, IdentityType>& retyping, bool misreport_endowments = false);

// Economies with |S_k| = schedule[k] extra identities of `principal`, each
// endowed with beta units of `good` in expectation and accepting one unit of
// it, so its expected demand for the good is at least beta at any price.
// Capacities stay fixed; elements are built on demand.
class SybilSequence {
 public:
  SybilSequence(Economy base, std::string principal, std::vector<std::size_t> schedule, std::size_t good,
                double beta);

  std::size_t size() const { return schedule_.size(); }
  SybilStep at(std::size_t k) const;
  // |S_k| / |N_k|.
  double share(std::size_t k) const;
  std::size_t good() const { return good_; }
  double beta() const { return beta_; }

 private:
  Economy base_;
  std::string principal_;
  std::vector<std::size_t> schedule_;
  std::size_t good_;
  double beta_;
};

SybilSequence unbounded_sybil_sequence(const Economy& base, const std::string& principal,
                                       std::vector<std::size_t> schedule, std::size_t good, double beta);

enum class SearchMode { Exhaustive, Random };

struct AttackFamily {
  AttackKind kind = AttackKind::Misreport;
  std::string principal;
  std::vector<SybilAttack> candidates;
  SearchMode search = SearchMode::Exhaustive;
  std::uint64_t seed = 1;
};

// Gain of an attack, or nullopt when it cannot be evaluated (for example
// the solver did not converge).
using AttackObjective = std::function<std::optional<double>(const SybilAttack&)>;

struct SearchResult {
  SybilAttack best;
  double best_gain = 0.0;
  bool found = false;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

// Evaluates up to `budget` candidates (in order, or a seeded sample without
// replacement) and returns the argmax. Ties keep the earliest evaluated.
SearchResult attack_search(const Economy& e, const AttackFamily& fam, const AttackObjective& objective,
                           std::size_t budget, std::size_t threads = 1);

// `count` random coordinated misreports by `principal`: each retypes a
// random non-empty subset of its identities (at most `max_retyped`) to
// orders drawn from `pool`.
// Reported type for an identity imitating `like`. With degenerate endowments
// on both sides, like's order is translated by (own - like's endowment) so
// the report stays centred on what the identity actually holds; bundles that
// would go negative are dropped. Otherwise like's order is used as is.
IdentityType anchored_misreport(const IdentityType& own, const IdentityType& like);

AttackFamily random_misreport_family(const Economy& e, const std::string& principal,
                                     const std::vector<IdentityType>& pool, std::size_t count,
                                     std::size_t max_retyped, std::uint64_t seed);

SybilAttack parse_attack(const nlohmann::json& j, const Economy& e);
nlohmann::json to_json(const SybilAttack& a);

}  // namespace brace
