#pragma once

#include <string>
#include <vector>

#include "brace/economy.hpp"
#include "brace/economy_io.hpp"

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(BRACE_DATA_DIR) + "/" + name; }

inline brace::Economy example1() { return brace::load_economy(data_path("example1.json")); }

inline brace::Bundle B(std::vector<int> q) { return brace::Bundle(std::move(q)); }

inline brace::Lottery det(std::vector<int> q) { return brace::Lottery::degenerate(B(std::move(q))); }

// Type whose only acceptable bundle is its endowment.
inline brace::IdentityType self_type(std::vector<int> q) {
  return brace::IdentityType(det(q), brace::WeakOrder({{B(q)}}));
}

inline brace::Identity ident(std::string id, std::string principal, brace::IdentityType t) {
  return brace::Identity{std::move(id), std::move(principal), std::move(t)};
}

// n identities over m goods, identity i endowed with (and only accepting) one
// unit of good i % m. Capacities follow the endowments.
inline brace::Economy self_demand_economy(std::size_t n, std::size_t m, double delta) {
  brace::EconomyDescription d;
  std::vector<int> cap(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> q(m, 0);
    q[i % m] = 1;
    ++cap[i % m];
    d.identities.push_back(ident("i" + std::to_string(i), "p" + std::to_string(i), self_type(q)));
  }
  for (std::size_t j = 0; j < m; ++j) d.goods.push_back({"g" + std::to_string(j), cap[j]});
  d.delta = delta;
  return brace::build_economy(std::move(d));
}

}  // namespace testing_support
