#pragma once
// Random discrete measures and the dense-LP W2 used as an oracle.
#include <algorithm>
#include <cmath>
#include <random>

#include "fdlab/metrics.hpp"
#include "lp_oracle.hpp"

namespace oracle {

inline fdlab::DiscreteMeasure random_measure(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  fdlab::DiscreteMeasure mu;
  mu.dim = dim;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    mu.support.push_back({U(rng), dim == 2 ? U(rng) : 0.0});
    mu.weights.push_back(0.05 + U(rng));
    s += mu.weights.back();
  }
  for (auto& w : mu.weights) w /= s;
  return mu;
}

inline double lp_w2(const fdlab::DiscreteMeasure& a, const fdlab::DiscreteMeasure& b) {
  std::vector<std::vector<double>> C(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double dx = a.support[i][0] - b.support[j][0], dy = a.support[i][1] - b.support[j][1];
      C[i][j] = dx * dx + dy * dy;
    }
  return std::sqrt(std::max(0.0, transport_lp(a.weights, b.weights, C)));
}

}  // namespace oracle
