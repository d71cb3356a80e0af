#include "brace/corpus.hpp"

#include <algorithm>
#include <set>

#include "brace/economy_io.hpp"

namespace brace {

std::vector<IdentityType> make_type_space(const CorpusTemplate& t, Rng& rng) {
  if (t.types == 0) throw SpecError("type space is empty");
  if (t.goods < 2) throw SpecError("corpus needs at least two goods");
  const std::size_t m = t.goods;
  std::vector<IdentityType> out;
  std::set<std::tuple<std::size_t, std::size_t, int>> seen;
  const std::size_t possible = t.family == TypeFamily::SelfDemand ? m : m * (m - 1) * 2;
  if (t.types > possible) throw SpecError("type space larger than the family allows");
  for (std::size_t k = 0; out.size() < t.types; ++k) {
    // Endowments cycle through the goods so every good has supply.
    const std::size_t g = k < m ? k : uniform_index(rng, m);
    if (t.family == TypeFamily::SelfDemand) {
      if (!seen.insert({g, g, 1}).second) continue;
      out.emplace_back(Lottery::degenerate(Bundle::unit(m, g)), WeakOrder({{Bundle::unit(m, g)}}));
      continue;
    }
    // The first m types shift cyclically so every good is someone's extra good;
    // otherwise its price collapses and buyers of it satiate.
    std::size_t h = (g + 1) % m;
    if (k >= m) {
      h = uniform_index(rng, m - 1);
      if (h >= g) ++h;
    }
    const int units = 4 + static_cast<int>(uniform_index(rng, 2));
    if (!seen.insert({g, h, units}).second) continue;
    const Bundle own = Bundle::unit(m, g);
    out.emplace_back(Lottery::degenerate(own),
                     WeakOrder({{own + Bundle::unit(m, h, units)}, {own}}));
  }
  return out;
}

Economy sample_economy(const std::vector<IdentityType>& space, std::size_t goods, std::size_t n, double delta,
                       Rng& rng) {
  if (space.empty()) throw SpecError("type space is empty");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    EconomyDescription d;
    std::vector<double> supply(goods, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = space[uniform_index(rng, space.size())];
      const auto ex = t.endowment().expectation();
      for (std::size_t j = 0; j < goods; ++j) supply[j] += ex[j];
      const std::string id = "i" + std::to_string(i);
      d.identities.push_back({id, id, t});
    }
    if (std::any_of(supply.begin(), supply.end(), [](double s) { return s < 0.5; })) continue;
    for (std::size_t j = 0; j < goods; ++j) {
      d.goods.push_back({"g" + std::to_string(j), static_cast<int>(std::lround(supply[j]))});
    }
    d.delta = delta;
    return build_economy(std::move(d));
  }
  throw SpecError("could not draw an economy with supply of every good");
}

std::vector<std::filesystem::path> corpus_generate(const CorpusTemplate& t, std::size_t count, std::uint64_t seed,
                                                   const std::filesystem::path& dir) {
  if (t.n_list.empty()) throw SpecError("corpus template needs an n-list");
  std::filesystem::create_directories(dir);
  Rng type_rng = make_rng(seed, 0x7);
  const auto space = make_type_space(t, type_rng);
  std::vector<std::filesystem::path> out;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = make_rng(seed, 1000 + k);
    const std::size_t n = t.n_list[k % t.n_list.size()];
    const auto e = sample_economy(space, t.goods, n, t.delta, rng);
    auto j = to_json(e.description());
    j["seed"] = seed;
    j["index"] = k;
    char name[64];
    std::snprintf(name, sizeof name, "economy_%05zu.json", k);
    out.push_back(dir / name);
    write_json_file(out.back(), j);
  }
  return out;
}

Economy reassign_principal(const Economy& e, const std::vector<std::size_t>& identities, const std::string& principal) {
  auto d = e.description();
  for (std::size_t i : identities) d.identities.at(i).principal = principal;
  return build_economy(std::move(d), EndowmentCheck::Relaxed);
}

}  // namespace brace
