#pragma once

#include <vector>

namespace lpinfer {

/// inf{u : F(u) >= q} for the empirical distribution of values; -inf entries
/// sort lowest.
double inf_quantile(std::vector<double> values, double q);

/// sup_u |F_a(u) - F_b(u)| for two empirical distributions.
double kolmogorov_distance(std::vector<double> a, std::vector<double> b);

double mean_of(const std::vector<double>& v);

}  // namespace lpinfer
