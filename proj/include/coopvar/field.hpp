#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "coopvar/grid.hpp"
#include "coopvar/kernels.hpp"

namespace coopvar {

/// Grid function on a region's nodes, in grid-index order.
struct FieldVector {
  Region region = Region::full;
  std::vector<double> values;
};

/// Discrete L2 norm with quadrature weight h^d.
inline double l2h_norm(std::span<const double> v, double cell_measure) {
  return std::sqrt(kern::dot(v, v) * cell_measure);
}

inline double l2h_inner(std::span<const double> a, std::span<const double> b, double cell_measure) {
  return kern::dot(a, b) * cell_measure;
}

/// Relative max-norm distance, used for "same solution" tests.
inline double rel_maxnorm_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max({den, std::abs(a[i]), std::abs(b[i])});
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace coopvar
