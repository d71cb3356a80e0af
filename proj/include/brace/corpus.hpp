#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brace/economy.hpp"
#include "brace/rng.hpp"

namespace brace {

enum class TypeFamily {
  Smooth,      // endowed with one unit of g; prefer g plus u in {4,5} units of h != g to g alone
  SelfDemand,  // accept only the endowment
};

struct CorpusTemplate {
  std::size_t goods = 4;
  std::size_t types = 6;
  std::vector<std::size_t> n_list{50};
  double delta = 0.1;
  TypeFamily family = TypeFamily::Smooth;
};

// Finite type space. For the smooth family every good is some type's
// endowment when types >= goods.
std::vector<IdentityType> make_type_space(const CorpusTemplate& t, Rng& rng);

// n i.i.d. identities from `space` (uniform), each its own principal.
// Capacities equal expected endowments; draws that leave a good without
// supply are rejected.
Economy sample_economy(const std::vector<IdentityType>& space, std::size_t goods, std::size_t n, double delta,
                       Rng& rng);

// Writes `count` economy files (round-robin over n_list) to `dir` and
// returns their paths. Each file records its seed and the type space is
// shared across the corpus.
std::vector<std::filesystem::path> corpus_generate(const CorpusTemplate& t, std::size_t count, std::uint64_t seed,
                                                   const std::filesystem::path& dir);

// Moves the listed identities to `principal`.
Economy reassign_principal(const Economy& e, const std::vector<std::size_t>& identities, const std::string& principal);

}  // namespace brace
