#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "coopvar/banded.hpp"
#include "coopvar/field.hpp"
#include "coopvar/grid.hpp"

namespace coopvar {

/// Dirichlet Laplacian on a grid region together with shifted solves
/// (A - lambda I)^{-1} and the non-local quadratic forms built from them.
/// A completed factorization is immutable; concurrent solves are fine.
class ShiftedOperator {
public:
  ShiftedOperator(const Grid& grid, Region region);

  const Grid& grid() const { return *grid_; }
  Region region() const { return region_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<std::vector<int>>& component_locals() const { return components_; }
  const SymBand& matrix() const { return a_; }
  double cell_measure() const { return grid_->cell_measure(); }

  /// y = (A - lambda I) x
  void apply(std::span<const double> x, std::span<double> y, double lambda = 0.0) const;

  /// Smallest eigenvalue of A on this region (cached; inverse power iteration).
  double smallest_eigenvalue() const;
  /// The associated eigenvector, unit max-norm, nonnegative.
  const std::vector<double>& smallest_eigenvector() const;

  /// Shared factorization of (A - lambda I); throws SHIFT_NOT_ADMISSIBLE for
  /// lambda >= smallest eigenvalue.
  std::shared_ptr<const BandCholesky> factorization(double lambda) const;

  std::vector<double> solve(double lambda, std::span<const double> rhs) const;

  /// <u, (A - lambda I)^{-1} u> * h^d
  double quadform(double lambda, std::span<const double> u) const;
  /// <u, (A - lambda I)^{-1} w> * h^d
  double bilinear(double lambda, std::span<const double> u, std::span<const double> w) const;

  /// Validation path: (A - lambda I)^{-1/2} u through a dense eigendecomposition.
  std::vector<double> inv_sqrt_apply(double lambda, std::span<const double> u) const;

  /// Dense eigendecomposition of A (cached); validation and low-mode sampling.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& dense_eig() const;

  /// Scatter a region vector into a full-grid vector (zero elsewhere).
  std::vector<double> extend_to_grid(std::span<const double> u) const;
  /// Gather a full-grid vector onto this region's nodes.
  std::vector<double> restrict_from_grid(std::span<const double> full) const;

  static constexpr int dense_node_cap = 20000;

private:
  void ensure_principal() const;

  const Grid* grid_;
  Region region_;
  std::vector<int> nodes_;                    // grid indices, ascending
  std::vector<int> local_;                    // grid idx -> local idx or -1
  std::vector<std::vector<int>> components_;  // local indices per connected component
  SymBand a_;

  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, std::shared_ptr<const BandCholesky>> factors_;
  mutable bool have_principal_ = false;
  mutable double sigma1_ = 0.0;
  mutable std::vector<double> phi1_;
  mutable std::unique_ptr<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eig_;
};

}  // namespace coopvar
