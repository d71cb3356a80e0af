#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace brace {

// Global tolerance for probability sums and endowment balance.
inline constexpr double kProbTol = 1e-9;

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integral vector of good quantities.
class Bundle {
 public:
  Bundle() = default;
  explicit Bundle(std::vector<int> quantities);

  static Bundle zero(std::size_t goods);
  static Bundle unit(std::size_t goods, std::size_t good, int count = 1);

  std::size_t size() const { return q_.size(); }
  int operator[](std::size_t j) const { return q_[j]; }
  const std::vector<int>& quantities() const { return q_; }
  bool is_zero() const;
  int total_units() const;

  // Componentwise >=.
  bool covers(const Bundle& other) const;
  // (x - e_k)^+ : removes one unit of good k, floored at zero.
  Bundle without_one(std::size_t good) const;
  double cost(std::span<const double> prices) const;

  Bundle operator+(const Bundle& other) const;

  friend auto operator<=>(const Bundle&, const Bundle&) = default;
  friend bool operator==(const Bundle&, const Bundle&) = default;

 private:
  std::vector<int> q_;
};

std::string to_string(const Bundle& b);

struct Outcome {
  Bundle bundle;
  double prob = 0.0;
};

// Finite distribution over bundles. Support is kept sorted and merged;
// zero-probability outcomes are dropped.
class Lottery {
 public:
  Lottery() = default;
  explicit Lottery(std::vector<Outcome> outcomes);

  static Lottery degenerate(Bundle b);
  // w * `base` + (1 - w) * zero bundle.
  static Lottery scaled(const Lottery& base, double w);

  std::span<const Outcome> support() const { return support_; }
  std::size_t goods() const { return support_.empty() ? 0 : support_.front().bundle.size(); }
  bool empty() const { return support_.empty(); }
  double probability_of(const Bundle& b) const;
  std::vector<double> expectation() const;

  friend bool operator==(const Lottery& a, const Lottery& b);
  friend std::strong_ordering operator<=>(const Lottery& a, const Lottery& b);

 private:
  std::vector<Outcome> support_;
};

// Indifference classes over the acceptable set, best class first.
class WeakOrder {
 public:
  WeakOrder() = default;
  explicit WeakOrder(std::vector<std::vector<Bundle>> classes);

  std::size_t class_count() const { return classes_.size(); }
  const std::vector<Bundle>& at(std::size_t k) const { return classes_[k]; }
  const std::vector<std::vector<Bundle>>& classes() const { return classes_; }
  std::optional<std::size_t> class_of(const Bundle& b) const;
  std::vector<Bundle> bundles() const;

  friend auto operator<=>(const WeakOrder&, const WeakOrder&) = default;
  friend bool operator==(const WeakOrder&, const WeakOrder&) = default;

 private:
  std::vector<std::vector<Bundle>> classes_;
};

// Reported type t_i: endowment lottery, acceptable set, weak order.
class IdentityType {
 public:
  IdentityType() = default;
  IdentityType(Lottery endowment, WeakOrder order);

  const Lottery& endowment() const { return endowment_; }
  const WeakOrder& order() const { return order_; }
  const std::vector<Bundle>& acceptable() const { return acceptable_; }
  bool accepts(const Bundle& b) const;

  // Copy with a new endowment. Endowment bundles missing from the order
  // are appended as one bottom indifference class.
  IdentityType with_endowment(Lottery endowment) const;

  friend bool operator==(const IdentityType& a, const IdentityType& b);
  friend std::strong_ordering operator<=>(const IdentityType& a, const IdentityType& b);

 private:
  Lottery endowment_;
  WeakOrder order_;
  std::vector<Bundle> acceptable_;  // sorted
};

// Builds a type, appending endowment-only bundles at the bottom of `order`.
IdentityType make_type_with_endowment_fallback(Lottery endowment, WeakOrder order);

struct Good {
  std::string name;
  int capacity = 1;
};

struct Identity {
  std::string id;
  std::string principal;
  IdentityType type;
};

struct EconomyDescription {
  std::vector<Good> goods;
  std::vector<Identity> identities;
  double delta = 0.0;
};

// Capacity: expected endowments may not exceed capacity. Supply nobody is
// endowed with stays with the exchange. Relaxed: no endowment check.
enum class EndowmentCheck { Capacity, Relaxed };

class Economy {
 public:
  std::size_t goods() const { return goods_.size(); }
  std::size_t size() const { return identities_.size(); }
  const std::vector<Good>& good_list() const { return goods_; }
  const std::vector<int>& capacity() const { return capacity_; }
  const std::vector<Identity>& identities() const { return identities_; }
  const Identity& identity(std::size_t i) const { return identities_[i]; }
  double delta() const { return delta_; }
  // True when expected endowments sum to capacity exactly.
  bool endowment_balanced() const { return balanced_; }

  std::optional<std::size_t> index_of(const std::string& id) const;
  std::vector<std::string> principals() const;  // sorted
  std::vector<std::size_t> owned_by(const std::string& principal) const;
  EconomyDescription description() const;

  friend Economy build_economy(EconomyDescription d, EndowmentCheck check);

 private:
  Economy() = default;
  std::vector<Good> goods_;
  std::vector<int> capacity_;
  std::vector<Identity> identities_;
  double delta_ = 0.0;
  bool balanced_ = true;
};

// Validates and builds. Throws SpecError on over-endowment
// (under EndowmentCheck::Capacity), unacceptable endowments, empty acceptable
// sets, dimension mismatches or duplicate ids.
Economy build_economy(EconomyDescription d, EndowmentCheck check = EndowmentCheck::Capacity);

class EmpiricalDistribution {
 public:
  EmpiricalDistribution(std::vector<std::pair<IdentityType, double>> atoms, std::size_t n);
  const std::vector<std::pair<IdentityType, double>>& atoms() const { return atoms_; }
  std::size_t population() const { return n_; }
  double weight_of(const IdentityType& t) const;

 private:
  std::vector<std::pair<IdentityType, double>> atoms_;  // sorted by type
  std::size_t n_;
};

EmpiricalDistribution empirical_distribution(const Economy& e);

// Wasserstein-1 under the discrete metric, i.e. total variation over the
// merged atom set.
double w1_discrete(const EmpiricalDistribution& mu, const EmpiricalDistribution& nu);

enum class AttackKind { Split, Misreport, MassStep };

struct Replacement {
  double share = 1.0;  // endowment share carried by this replacement
  IdentityType type;   // endowment ignored for splits (derived from share)
};

struct SybilAttack {
  std::string principal;
  AttackKind kind = AttackKind::Misreport;
  std::map<std::string, std::vector<Replacement>> replacements;
  // For mass-sequence steps: number of fresh Sybil identities.
  std::size_t fresh_identities = 0;

  bool empty() const { return replacements.empty() && fresh_identities == 0; }
};

std::string to_string(AttackKind k);
AttackKind attack_kind_from_string(const std::string& s);

// New identities / pre-attack |N| for splits and mass steps; retyped
// identities / |N| for misreports.
double infiltration_rate(const SybilAttack& a, const Economy& e);

double identity_share(const std::string& principal, const Economy& e);

struct PrincipalAggregate {
  std::map<std::string, std::vector<double>> totals;
  std::vector<std::string> empty_principals;
};

PrincipalAggregate aggregate_by_principal(std::span<const Lottery> allocation, const Economy& e,
                                          std::span<const std::string> extra_principals = {});

}  // namespace brace
