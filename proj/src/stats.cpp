#include "lpinfer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lpinfer {

double inf_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("inf_quantile: no values");
  std::sort(values.begin(), values.end());
  const double b = static_cast<double>(values.size());
  auto k = static_cast<std::size_t>(std::ceil(q * b - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

double kolmogorov_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("kolmogorov_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double u;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      u = a[i];
    } else {
      u = b[j];
    }
    while (i < a.size() && a[i] <= u) ++i;
    while (j < b.size() && b[j] <= u) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace lpinfer
