#include "brace/economy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace brace {

Bundle::Bundle(std::vector<int> quantities) : q_(std::move(quantities)) {
  for (int v : q_) {
    if (v < 0) throw SpecError("bundle has a negative quantity");
  }
}

Bundle Bundle::zero(std::size_t goods) { return Bundle(std::vector<int>(goods, 0)); }

Bundle Bundle::unit(std::size_t goods, std::size_t good, int count) {
  std::vector<int> q(goods, 0);
  q.at(good) = count;
  return Bundle(std::move(q));
}

bool Bundle::is_zero() const {
  return std::all_of(q_.begin(), q_.end(), [](int v) { return v == 0; });
}

int Bundle::total_units() const { return std::accumulate(q_.begin(), q_.end(), 0); }

bool Bundle::covers(const Bundle& other) const {
  if (other.size() != size()) return false;
  for (std::size_t j = 0; j < q_.size(); ++j) {
    if (q_[j] < other.q_[j]) return false;
  }
  return true;
}

Bundle Bundle::without_one(std::size_t good) const {
  Bundle out = *this;
  if (out.q_.at(good) > 0) --out.q_[good];
  return out;
}

double Bundle::cost(std::span<const double> prices) const {
  if (prices.size() != q_.size()) throw SpecError("price/bundle dimension mismatch");
  double v = 0.0;
  for (std::size_t j = 0; j < q_.size(); ++j) v += prices[j] * q_[j];
  return v;
}

Bundle Bundle::operator+(const Bundle& other) const {
  if (other.size() != size()) throw SpecError("bundle dimension mismatch");
  Bundle out = *this;
  for (std::size_t j = 0; j < q_.size(); ++j) out.q_[j] += other.q_[j];
  return out;
}

std::string to_string(const Bundle& b) {
  std::ostringstream os;
  os << '[';
  for (std::size_t j = 0; j < b.size(); ++j) os << (j ? "," : "") << b[j];
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------

Lottery::Lottery(std::vector<Outcome> outcomes) {
  if (outcomes.empty()) throw SpecError("lottery has empty support");
  const std::size_t m = outcomes.front().bundle.size();
  double total = 0.0;
  for (const auto& o : outcomes) {
    if (o.bundle.size() != m) throw SpecError("lottery bundles differ in dimension");
    if (!(o.prob >= -kProbTol) || o.prob > 1.0 + kProbTol) throw SpecError("lottery probability outside [0,1]");
    total += o.prob;
  }
  if (std::abs(total - 1.0) > kProbTol) throw SpecError("lottery probabilities do not sum to 1");

  std::sort(outcomes.begin(), outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.bundle < b.bundle; });
  for (auto& o : outcomes) {
    if (!support_.empty() && support_.back().bundle == o.bundle) {
      support_.back().prob += o.prob;
    } else {
      support_.push_back(std::move(o));
    }
  }
  std::erase_if(support_, [](const Outcome& o) { return o.prob <= 0.0; });
  if (support_.empty()) throw SpecError("lottery has empty support");
}

Lottery Lottery::degenerate(Bundle b) { return Lottery({Outcome{std::move(b), 1.0}}); }

Lottery Lottery::scaled(const Lottery& base, double w) {
  if (w < 0.0 || w > 1.0 + kProbTol) throw SpecError("endowment share outside [0,1]");
  std::vector<Outcome> out;
  for (const auto& o : base.support()) out.push_back({o.bundle, o.prob * w});
  if (w < 1.0) out.push_back({Bundle::zero(base.goods()), 1.0 - w});
  return Lottery(std::move(out));
}

double Lottery::probability_of(const Bundle& b) const {
  for (const auto& o : support_) {
    if (o.bundle == b) return o.prob;
  }
  return 0.0;
}

std::vector<double> Lottery::expectation() const {
  std::vector<double> ex(goods(), 0.0);
  for (const auto& o : support_) {
    for (std::size_t j = 0; j < ex.size(); ++j) ex[j] += o.prob * o.bundle[j];
  }
  return ex;
}

bool operator==(const Lottery& a, const Lottery& b) {
  if (a.support_.size() != b.support_.size()) return false;
  for (std::size_t k = 0; k < a.support_.size(); ++k) {
    if (a.support_[k].bundle != b.support_[k].bundle) return false;
    if (a.support_[k].prob != b.support_[k].prob) return false;
  }
  return true;
}

std::strong_ordering operator<=>(const Lottery& a, const Lottery& b) {
  const std::size_t n = std::min(a.support_.size(), b.support_.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (auto c = a.support_[k].bundle <=> b.support_[k].bundle; c != 0) return c;
    const double pa = a.support_[k].prob, pb = b.support_[k].prob;
    if (pa < pb) return std::strong_ordering::less;
    if (pa > pb) return std::strong_ordering::greater;
  }
  return a.support_.size() <=> b.support_.size();
}

// ---------------------------------------------------------------------------

WeakOrder::WeakOrder(std::vector<std::vector<Bundle>> classes) : classes_(std::move(classes)) {
  std::set<Bundle> seen;
  std::size_t m = 0;
  bool have_m = false;
  for (auto& cls : classes_) {
    if (cls.empty()) throw SpecError("weak order has an empty indifference class");
    std::sort(cls.begin(), cls.end());
    for (const auto& b : cls) {
      if (!have_m) {
        m = b.size();
        have_m = true;
      } else if (b.size() != m) {
        throw SpecError("weak order bundles differ in dimension");
      }
      if (!seen.insert(b).second) throw SpecError("bundle " + to_string(b) + " appears in two classes");
    }
  }
}

std::optional<std::size_t> WeakOrder::class_of(const Bundle& b) const {
  for (std::size_t k = 0; k < classes_.size(); ++k) {
    if (std::binary_search(classes_[k].begin(), classes_[k].end(), b)) return k;
  }
  return std::nullopt;
}

std::vector<Bundle> WeakOrder::bundles() const {
  std::vector<Bundle> out;
  for (const auto& cls : classes_) out.insert(out.end(), cls.begin(), cls.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

IdentityType::IdentityType(Lottery endowment, WeakOrder order)
    : endowment_(std::move(endowment)), order_(std::move(order)), acceptable_(order_.bundles()) {
  if (acceptable_.empty()) throw SpecError("identity has an empty acceptable set");
  if (endowment_.empty()) throw SpecError("identity has no endowment");
  if (endowment_.goods() != acceptable_.front().size()) throw SpecError("endowment dimension mismatch");
  for (const auto& o : endowment_.support()) {
    if (!accepts(o.bundle)) throw SpecError("endowment bundle " + to_string(o.bundle) + " is not acceptable");
  }
}

bool IdentityType::accepts(const Bundle& b) const {
  return std::binary_search(acceptable_.begin(), acceptable_.end(), b);
}

IdentityType IdentityType::with_endowment(Lottery endowment) const {
  return make_type_with_endowment_fallback(std::move(endowment), order_);
}

IdentityType make_type_with_endowment_fallback(Lottery endowment, WeakOrder order) {
  std::vector<Bundle> missing;
  for (const auto& o : endowment.support()) {
    if (!order.class_of(o.bundle)) missing.push_back(o.bundle);
  }
  if (missing.empty()) return IdentityType(std::move(endowment), std::move(order));
  auto classes = order.classes();
  classes.push_back(std::move(missing));
  return IdentityType(std::move(endowment), WeakOrder(std::move(classes)));
}

bool operator==(const IdentityType& a, const IdentityType& b) {
  return a.endowment_ == b.endowment_ && a.order_ == b.order_;
}

std::strong_ordering operator<=>(const IdentityType& a, const IdentityType& b) {
  if (auto c = a.endowment_ <=> b.endowment_; c != 0) return c;
  return a.order_ <=> b.order_;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> Economy::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < identities_.size(); ++i) {
    if (identities_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Economy::principals() const {
  std::set<std::string> s;
  for (const auto& id : identities_) s.insert(id.principal);
  return {s.begin(), s.end()};
}

std::vector<std::size_t> Economy::owned_by(const std::string& principal) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < identities_.size(); ++i) {
    if (identities_[i].principal == principal) out.push_back(i);
  }
  return out;
}

EconomyDescription Economy::description() const { return {goods_, identities_, delta_}; }

Economy build_economy(EconomyDescription d, EndowmentCheck check) {
  if (d.goods.empty()) throw SpecError("economy has no goods");
  if (!(d.delta >= 0.0)) throw SpecError("delta must be non-negative");
  const std::size_t m = d.goods.size();
  Economy e;
  for (const auto& g : d.goods) {
    if (g.capacity <= 0) throw SpecError("good '" + g.name + "' has non-positive capacity");
    e.capacity_.push_back(g.capacity);
  }
  std::set<std::string> ids;
  std::vector<double> endowed(m, 0.0);
  for (const auto& id : d.identities) {
    if (id.id.empty() || id.principal.empty()) throw SpecError("identity or principal id is empty");
    if (!ids.insert(id.id).second) throw SpecError("duplicate identity id '" + id.id + "'");
    if (id.type.acceptable().empty()) throw SpecError("identity '" + id.id + "' has an empty acceptable set");
    if (id.type.acceptable().front().size() != m) throw SpecError("identity '" + id.id + "' has wrong bundle length");
    const auto ex = id.type.endowment().expectation();
    for (std::size_t j = 0; j < m; ++j) endowed[j] += ex[j];
  }
  bool balanced = true, over = false;
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(endowed[j] - e.capacity_[j]) > kProbTol) balanced = false;
    if (endowed[j] > e.capacity_[j] + kProbTol) over = true;
  }
  if (over && check == EndowmentCheck::Capacity) {
    throw SpecError("expected endowments exceed capacity");
  }
  e.goods_ = std::move(d.goods);
  e.identities_ = std::move(d.identities);
  e.delta_ = d.delta;
  e.balanced_ = balanced;
  return e;
}

// ---------------------------------------------------------------------------

EmpiricalDistribution::EmpiricalDistribution(std::vector<std::pair<IdentityType, double>> atoms, std::size_t n)
    : atoms_(std::move(atoms)), n_(n) {
  std::sort(atoms_.begin(), atoms_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
}

double EmpiricalDistribution::weight_of(const IdentityType& t) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                             [](const auto& a, const IdentityType& key) { return a.first < key; });
  return (it != atoms_.end() && it->first == t) ? it->second : 0.0;
}

EmpiricalDistribution empirical_distribution(const Economy& e) {
  std::map<IdentityType, std::size_t> counts;
  for (const auto& id : e.identities()) ++counts[id.type];
  std::vector<std::pair<IdentityType, double>> atoms;
  const double n = static_cast<double>(e.size());
  for (auto& [t, c] : counts) atoms.emplace_back(t, static_cast<double>(c) / n);
  return EmpiricalDistribution(std::move(atoms), e.size());
}

double w1_discrete(const EmpiricalDistribution& mu, const EmpiricalDistribution& nu) {
  // Merge walk over two sorted atom lists.
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  double tv = 0.0;
  std::size_t i = 0, k = 0;
  while (i < a.size() || k < b.size()) {
    if (k == b.size() || (i < a.size() && a[i].first < b[k].first)) {
      tv += a[i++].second;
    } else if (i == a.size() || b[k].first < a[i].first) {
      tv += b[k++].second;
    } else {
      tv += std::abs(a[i++].second - b[k++].second);
    }
  }
  return 0.5 * tv;
}

// ---------------------------------------------------------------------------

std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::Split: return "split";
    case AttackKind::Misreport: return "misreport";
    case AttackKind::MassStep: return "mass-sequence-step";
  }
  return "?";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "split" || s == "splits") return AttackKind::Split;
  if (s == "misreport" || s == "misreports") return AttackKind::Misreport;
  if (s == "mass-sequence-step" || s == "mass") return AttackKind::MassStep;
  throw SpecError("unknown attack kind '" + s + "'");
}

double infiltration_rate(const SybilAttack& a, const Economy& e) {
  if (e.size() == 0) return 0.0;
  std::size_t count = 0;
  for (const auto& [id, parts] : a.replacements) {
    if (!e.index_of(id)) throw SpecError("attack references unknown identity '" + id + "'");
    if (a.kind == AttackKind::Misreport) {
      ++count;
    } else if (!parts.empty()) {
      count += parts.size() - 1;
    }
  }
  count += a.fresh_identities;
  return static_cast<double>(count) / static_cast<double>(e.size());
}

double identity_share(const std::string& principal, const Economy& e) {
  const auto owned = e.owned_by(principal);
  if (owned.empty()) throw SpecError("unknown principal '" + principal + "'");
  return static_cast<double>(owned.size()) / static_cast<double>(e.size());
}

PrincipalAggregate aggregate_by_principal(std::span<const Lottery> allocation, const Economy& e,
                                          std::span<const std::string> extra_principals) {
  if (allocation.size() != e.size()) throw SpecError("allocation is missing identities");
  PrincipalAggregate out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    auto& acc = out.totals[e.identity(i).principal];
    acc.resize(e.goods(), 0.0);
    const auto ex = allocation[i].expectation();
    if (ex.size() != e.goods()) throw SpecError("allocation bundle dimension mismatch");
    for (std::size_t j = 0; j < ex.size(); ++j) acc[j] += ex[j];
  }
  for (const auto& p : extra_principals) {
    if (!out.totals.contains(p)) {
      out.totals[p] = std::vector<double>(e.goods(), 0.0);
      out.empty_principals.push_back(p);
    }
  }
  return out;
}

}  // namespace brace
