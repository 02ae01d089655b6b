#pragma once

#include "pnmc/pnmc.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

/// log2 slope between consecutive errors on grids refined by 2.
inline std::vector<double> orders(const std::vector<double>& err) {
  std::vector<double> out;
  for (std::size_t k = 1; k < err.size(); ++k) out.push_back(std::log2(err[k - 1] / err[k]));
  return out;
}

inline double min_order(const std::vector<double>& err) {
  double m = INFINITY;
  for (double o : orders(err)) m = std::min(m, o);
  return m;
}

inline pnmc::MinkVec random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return {d(rng), d(rng), d(rng), d(rng)};
}

/// Boost with rapidity phi in the (x1, x4) plane.
inline pnmc::Mat4 boost14(double phi) {
  pnmc::Mat4 L = pnmc::Mat4::Identity();
  L(0, 0) = L(3, 3) = std::cosh(phi);
  L(0, 3) = L(3, 0) = std::sinh(phi);
  return L;
}

}  // namespace testing_support
