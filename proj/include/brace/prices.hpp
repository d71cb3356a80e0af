#pragma once

#include <span>
#include <vector>

#include "brace/rng.hpp"

namespace brace {

// Point on the (m-1)-simplex.
class PriceVector {
 public:
  PriceVector() = default;
  // Throws SpecError unless entries are non-negative and sum to 1 +- 1e-9.
  explicit PriceVector(std::vector<double> p);

  static PriceVector uniform(std::size_t goods);
  static PriceVector random(std::size_t goods, Rng& rng);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t j) const { return p_[j]; }
  std::span<const double> values() const { return p_; }
  const std::vector<double>& vector() const { return p_; }

 private:
  std::vector<double> p_;
};

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::span<const double> v);

double euclidean_distance(std::span<const double> a, std::span<const double> b);
double euclidean_norm(std::span<const double> a);

}  // namespace brace
