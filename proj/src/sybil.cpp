#include "brace/sybil.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brace/economy_io.hpp"
#include "brace/parallel.hpp"

namespace brace {

namespace {

const Identity& owned_identity(const Economy& e, const std::string& id, const std::string& principal) {
  const auto idx = e.index_of(id);
  if (!idx) throw SpecError("attack references unknown identity '" + id + "'");
  const auto& ident = e.identity(*idx);
  if (ident.principal != principal) {
    throw SpecError("identity '" + id + "' is owned by '" + ident.principal + "', not '" + principal + "'");
  }
  return ident;
}

std::string part_name(const std::string& id, std::size_t k) {
  std::string suffix;
  for (std::size_t v = k;; v = v / 26 - 1) {
    suffix.insert(suffix.begin(), static_cast<char>('a' + v % 26));
    if (v < 26) break;
  }
  return id + suffix;
}

}  // namespace

Economy apply_attack(const Economy& e, const SybilAttack& a) {
  if (a.empty()) return e;
  if (a.kind == AttackKind::Misreport) {
    std::map<std::string, IdentityType> retyping;
    for (const auto& [id, parts] : a.replacements) {
      if (parts.size() != 1) throw SpecError("a misreport replaces identity '" + id + "' by exactly one type");
      retyping.emplace(id, parts.front().type);
    }
    return coordinated_misreport(e, a.principal, retyping);
  }
  if (a.kind == AttackKind::MassStep) throw SpecError("mass-sequence steps are built by unbounded_sybil_sequence");

  for (const auto& [id, parts] : a.replacements) {
    owned_identity(e, id, a.principal);
    if (parts.empty()) throw SpecError("split of '" + id + "' has no parts");
    double total = 0.0;
    for (const auto& r : parts) {
      if (!(r.share > 0.0)) throw SpecError("split shares must be positive");
      total += r.share;
    }
    if (std::abs(total - 1.0) > kProbTol) throw SpecError("split shares of '" + id + "' do not sum to 1");
  }
  auto d = e.description();
  std::vector<Identity> out;
  for (auto& ident : d.identities) {
    const auto it = a.replacements.find(ident.id);
    if (it == a.replacements.end()) {
      out.push_back(std::move(ident));
      continue;
    }
    const auto& parts = it->second;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto endowment = Lottery::scaled(ident.type.endowment(), parts[k].share);
      out.push_back({parts.size() == 1 ? ident.id : part_name(ident.id, k), a.principal,
                     make_type_with_endowment_fallback(endowment, parts[k].type.order())});
    }
  }
  d.identities = std::move(out);
  for (std::size_t i = 0; i < d.identities.size(); ++i) {
    for (std::size_t k = i + 1; k < d.identities.size(); ++k) {
      if (d.identities[i].id == d.identities[k].id) throw SpecError("split creates duplicate id '" + d.identities[i].id + "'");
    }
  }
  return build_economy(std::move(d), EndowmentCheck::Relaxed);
}

Economy coordinated_misreport(const Economy& e, const std::string& principal,
                              const std::map<std::string, IdentityType>& retyping, bool misreport_endowments) {
  for (const auto& [id, t] : retyping) owned_identity(e, id, principal);
  auto d = e.description();
  for (auto& ident : d.identities) {
    const auto it = retyping.find(ident.id);
    if (it == retyping.end()) continue;
    ident.type = misreport_endowments ? it->second
                                      : make_type_with_endowment_fallback(ident.type.endowment(), it->second.order());
  }
  return build_economy(std::move(d), EndowmentCheck::Relaxed);
}

SybilSequence::SybilSequence(Economy base, std::string principal, std::vector<std::size_t> schedule, std::size_t good,
                             double beta)
    : base_(std::move(base)), principal_(std::move(principal)), schedule_(std::move(schedule)), good_(good), beta_(beta) {
  if (good_ >= base_.goods()) throw SpecError("designated good out of range");
  if (beta_ < 0.0 || beta_ > 1.0) throw SpecError("beta must lie in [0, 1]");
  for (std::size_t k = 1; k < schedule_.size(); ++k) {
    if (schedule_[k] <= schedule_[k - 1]) throw SpecError("Sybil schedule must be strictly increasing");
  }
}

SybilStep SybilSequence::at(std::size_t k) const {
  const std::size_t m = base_.goods();
  const Bundle unit = Bundle::unit(m, good_);
  const auto endowment = Lottery::scaled(Lottery::degenerate(unit), beta_);
  const auto type = make_type_with_endowment_fallback(endowment, WeakOrder({{unit}}));
  auto d = base_.description();
  std::vector<std::string> sybils;
  for (std::size_t s = 0; s < schedule_.at(k); ++s) {
    std::string id = principal_ + "#s" + std::to_string(s + 1);
    sybils.push_back(id);
    d.identities.push_back({std::move(id), principal_, type});
  }
  return {build_economy(std::move(d), EndowmentCheck::Relaxed), std::move(sybils)};
}

double SybilSequence::share(std::size_t k) const {
  const double s = static_cast<double>(schedule_.at(k));
  return s / (static_cast<double>(base_.size()) + s);
}

SybilSequence unbounded_sybil_sequence(const Economy& base, const std::string& principal,
                                       std::vector<std::size_t> schedule, std::size_t good, double beta) {
  return SybilSequence(base, principal, std::move(schedule), good, beta);
}

SearchResult attack_search(const Economy& e, const AttackFamily& fam, const AttackObjective& objective,
                           std::size_t budget, std::size_t threads) {
  for (const auto& c : fam.candidates) {
    if (!c.empty() && c.principal != fam.principal) throw SpecError("candidate attack by a different principal");
    for (const auto& [id, parts] : c.replacements) owned_identity(e, id, fam.principal);
  }
  std::vector<std::size_t> order(fam.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  if (fam.search == SearchMode::Random) {
    Rng rng = make_rng(fam.seed, 0xa77ac);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  order.resize(std::min(budget, order.size()));

  std::vector<std::optional<double>> gains(order.size());
  parallel_for(order.size(), threads, [&](std::size_t k) { gains[k] = objective(fam.candidates[order[k]]); });

  SearchResult out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!gains[k]) {
      ++out.skipped;
      continue;
    }
    ++out.evaluated;
    if (!out.found || *gains[k] > out.best_gain) {
      out.found = true;
      out.best_gain = *gains[k];
      out.best = fam.candidates[order[k]];
    }
  }
  return out;
}

IdentityType anchored_misreport(const IdentityType& own, const IdentityType& like) {
  const auto os = own.endowment().support();
  const auto ls = like.endowment().support();
  if (os.size() != 1 || ls.size() != 1) return make_type_with_endowment_fallback(own.endowment(), like.order());
  const auto& a = os.front().bundle;
  const auto& b = ls.front().bundle;
  std::vector<std::vector<Bundle>> classes;
  for (const auto& cls : like.order().classes()) {
    std::vector<Bundle> out;
    for (const auto& x : cls) {
      std::vector<int> q(x.size());
      bool ok = true;
      for (std::size_t j = 0; j < q.size(); ++j) {
        q[j] = x[j] - b[j] + a[j];
        ok = ok && q[j] >= 0;
      }
      if (ok) out.emplace_back(std::move(q));
    }
    if (!out.empty()) classes.push_back(std::move(out));
  }
  if (classes.empty()) classes.push_back({a});
  return make_type_with_endowment_fallback(own.endowment(), WeakOrder(std::move(classes)));
}

AttackFamily random_misreport_family(const Economy& e, const std::string& principal,
                                     const std::vector<IdentityType>& pool, std::size_t count,
                                     std::size_t max_retyped, std::uint64_t seed) {
  const auto owned = e.owned_by(principal);
  if (owned.empty()) throw SpecError("unknown principal '" + principal + "'");
  if (pool.empty()) throw SpecError("misreport pool is empty");
  AttackFamily fam{AttackKind::Misreport, principal, {}, SearchMode::Exhaustive, seed};
  for (std::size_t c = 0; c < count; ++c) {
    Rng rng = make_rng(seed, c);
    auto ids = owned;
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[uniform_index(rng, i)]);
    const std::size_t k = 1 + uniform_index(rng, std::min(max_retyped, ids.size()));
    SybilAttack a{principal, AttackKind::Misreport, {}, 0};
    for (std::size_t r = 0; r < k; ++r) {
      const auto& ident = e.identity(ids[r]);
      const auto& t = pool[uniform_index(rng, pool.size())];
      a.replacements[ident.id] = {Replacement{1.0, anchored_misreport(ident.type, t)}};
    }
    fam.candidates.push_back(std::move(a));
  }
  return fam;
}

SybilAttack parse_attack(const nlohmann::json& j, const Economy& e) {
  try {
    SybilAttack a;
    a.principal = j.at("principal").get<std::string>();
    a.kind = attack_kind_from_string(j.at("kind").get<std::string>());
    const std::size_t m = e.goods();
    auto original = [&](const std::string& id) -> const Identity& {
      const auto idx = e.index_of(id);
      if (!idx) throw SpecError("attack references unknown identity '" + id + "'");
      return e.identity(*idx);
    };
    if (a.kind == AttackKind::Split && j.contains("replacements")) {
      for (const auto& [id, parts] : j.at("replacements").items()) {
        const auto& base = original(id);
        auto& out = a.replacements[id];
        for (const auto& part : parts) {
          const double share = part.at("share").get<double>();
          const auto endow = Lottery::scaled(base.type.endowment(), std::clamp(share, 0.0, 1.0));
          out.push_back({share, make_type_with_endowment_fallback(endow, parse_order(part, m))});
        }
      }
    } else if (a.kind == AttackKind::Misreport && j.contains("retyping")) {
      const bool with_endowment = j.value("misreport_endowments", false);
      for (const auto& [id, t] : j.at("retyping").items()) {
        const auto& base = original(id);
        a.replacements[id] = {Replacement{
            1.0, with_endowment ? parse_type(t, m)
                                : make_type_with_endowment_fallback(base.type.endowment(), parse_order(t, m))}};
      }
    } else if (a.kind == AttackKind::MassStep) {
      a.fresh_identities = j.value("sybils", std::size_t{0});
    }
    return a;
  } catch (const nlohmann::json::exception& ex) {
    throw SpecError(std::string("malformed attack spec: ") + ex.what());
  }
}

nlohmann::json to_json(const SybilAttack& a) {
  nlohmann::json j{{"principal", a.principal}, {"kind", to_string(a.kind)}};
  if (a.kind == AttackKind::MassStep) {
    j["sybils"] = a.fresh_identities;
    return j;
  }
  nlohmann::json reps = nlohmann::json::object();
  for (const auto& [id, parts] : a.replacements) {
    if (a.kind == AttackKind::Misreport) {
      if (!parts.empty()) reps[id] = to_json(parts.front().type);
      continue;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : parts) {
      auto t = to_json(r.type);
      t.erase("endowment");
      t["share"] = r.share;
      arr.push_back(std::move(t));
    }
    reps[id] = std::move(arr);
  }
  j[a.kind == AttackKind::Split ? "replacements" : "retyping"] = std::move(reps);
  return j;
}

}  // namespace brace
