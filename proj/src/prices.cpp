#include "brace/prices.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "brace/economy.hpp"

namespace brace {

PriceVector::PriceVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw SpecError("empty price vector");
  double s = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw SpecError("negative price");
    s += v;
  }
  if (std::abs(s - 1.0) > kProbTol) throw SpecError("prices do not sum to 1");
}

PriceVector PriceVector::uniform(std::size_t goods) {
  return PriceVector(std::vector<double>(goods, 1.0 / static_cast<double>(goods)));
}

PriceVector PriceVector::random(std::size_t goods, Rng& rng) {
  std::vector<double> e(goods);
  for (auto& v : e) v = -std::log(1.0 - uniform01(rng));
  const double s = std::accumulate(e.begin(), e.end(), 0.0);
  for (auto& v : e) v /= s;
  return PriceVector(project_to_simplex(e));
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::max(v[j] - theta, 0.0);
    s += out[j];
  }
  // Renormalize away rounding drift.
  if (s > 0.0) {
    for (auto& x : out) x /= s;
  }
  return out;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

double euclidean_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

}  // namespace brace
