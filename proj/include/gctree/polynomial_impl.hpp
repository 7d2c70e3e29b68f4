#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace gct {

template <class NewtonRatio>
std::vector<cplx> aberth_implicit(int degree, double start_radius, NewtonRatio newton, int max_iterations) {
  std::vector<cplx> z(static_cast<std::size_t>(degree));
  for (int k = 0; k < degree; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / degree + 0.4;
    z[static_cast<std::size_t>(k)] = std::polar(start_radius, angle);
  }
  std::vector<char> done(z.size(), 0);
  for (int it = 0; it < max_iterations; ++it) {
    bool all_done = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (done[k]) continue;
      const cplx ratio = newton(z[k]);
      if (ratio == cplx(0.0)) {
        done[k] = 1;
        continue;
      }
      cplx repulsion = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      }
      const cplx step = ratio / (1.0 - ratio * repulsion);
      z[k] -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z[k]))) {
        done[k] = 1;
      } else {
        all_done = false;
      }
    }
    if (all_done) break;
  }
  return z;
}

}  // namespace gct
