#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace coopvar {

/// Symmetric band matrix, lower storage: a(d, j) = A(j+d, j), 0 <= d <= kd.
struct SymBand {
  int n = 0;
  int kd = 0;
  std::vector<double> ab;  // (kd+1) x n, column-major by j

  SymBand() = default;
  SymBand(int n_, int kd_) : n(n_), kd(kd_), ab(static_cast<std::size_t>(kd_ + 1) * n_, 0.0) {}

  double& at(int d, int j) { return ab[static_cast<std::size_t>(d) + static_cast<std::size_t>(j) * (kd + 1)]; }
  double at(int d, int j) const { return ab[static_cast<std::size_t>(d) + static_cast<std::size_t>(j) * (kd + 1)]; }

  /// y = (A - shift*I) x
  void apply(std::span<const double> x, std::span<double> y, double shift = 0.0) const;
  Eigen::MatrixXd to_dense() const;
  /// Row-wise Gershgorin lower bound on the spectrum.
  double gershgorin_lower() const;
  /// Max absolute row sum; the scale of rounding noise in apply().
  double inf_norm() const;
};

/// Cholesky factor of an SPD band matrix; solve is const and reentrant.
class BandCholesky {
public:
  /// Factors A - shift*I. Returns an invalid object if not positive definite.
  static BandCholesky compute(const SymBand& a, double shift = 0.0);

  bool ok() const { return ok_; }
  int size() const { return n_; }
  void solve(std::span<const double> b, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> b) const;

private:
  int n_ = 0, kd_ = 0;
  bool ok_ = false;
  std::vector<double> l_;  // same layout as SymBand
  double lat(int d, int j) const { return l_[static_cast<std::size_t>(d) + static_cast<std::size_t>(j) * (kd_ + 1)]; }
  double& lat(int d, int j) { return l_[static_cast<std::size_t>(d) + static_cast<std::size_t>(j) * (kd_ + 1)]; }
};

/// General band matrix: a(ku + i - j, j) = A(i,j), -ku <= i-j <= kl.
struct GenBand {
  int n = 0, kl = 0, ku = 0;
  std::vector<double> ab;  // (kl+ku+1) x n

  GenBand() = default;
  GenBand(int n_, int kl_, int ku_)
      : n(n_), kl(kl_), ku(ku_), ab(static_cast<std::size_t>(kl_ + ku_ + 1) * n_, 0.0) {}

  double& at(int i, int j) {
    return ab[static_cast<std::size_t>(ku + i - j) + static_cast<std::size_t>(j) * (kl + ku + 1)];
  }
  double at(int i, int j) const {
    return ab[static_cast<std::size_t>(ku + i - j) + static_cast<std::size_t>(j) * (kl + ku + 1)];
  }

  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::MatrixXd to_dense() const;
  double gershgorin_lower() const;
  double inf_norm() const;
};

/// LU without pivoting; intended for diagonally dominant M-matrices where
/// pivot growth cannot occur. Fails (ok()==false) on a tiny pivot.
class BandLU {
public:
  static BandLU compute(const GenBand& a);

  bool ok() const { return ok_; }
  int size() const { return n_; }
  void solve(std::span<const double> b, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> b) const;

private:
  int n_ = 0, kl_ = 0, ku_ = 0;
  bool ok_ = false;
  std::vector<double> lu_;
  double luat(int i, int j) const {
    return lu_[static_cast<std::size_t>(ku_ + i - j) + static_cast<std::size_t>(j) * (kl_ + ku_ + 1)];
  }
  double& luat(int i, int j) {
    return lu_[static_cast<std::size_t>(ku_ + i - j) + static_cast<std::size_t>(j) * (kl_ + ku_ + 1)];
  }
};

}  // namespace coopvar
