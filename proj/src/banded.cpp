#include "coopvar/banded.hpp"

#include <algorithm>
#include <cmath>

#include "coopvar/kernels.hpp"

namespace coopvar {

void SymBand::apply(std::span<const double> x, std::span<double> y, double shift) const {
  kern::band_symv(n, kd, ab.data(), x.data(), y.data());
  if (shift != 0.0) {
    for (int i = 0; i < n; ++i) y[i] -= shift * x[i];
  }
}

Eigen::MatrixXd SymBand::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int d = 0; d <= std::min(kd, n - 1 - j); ++d) {
      m(j + d, j) = at(d, j);
      m(j, j + d) = at(d, j);
    }
  }
  return m;
}

double SymBand::gershgorin_lower() const {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double offsum = 0.0;
    for (int d = 1; d <= std::min(kd, i); ++d) offsum += std::abs(at(d, i - d));
    for (int d = 1; d <= std::min(kd, n - 1 - i); ++d) offsum += std::abs(at(d, i));
    lo = std::min(lo, at(0, i) - offsum);
  }
  return lo;
}

double SymBand::inf_norm() const {
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = std::abs(at(0, i));
    for (int d = 1; d <= std::min(kd, i); ++d) row += std::abs(at(d, i - d));
    for (int d = 1; d <= std::min(kd, n - 1 - i); ++d) row += std::abs(at(d, i));
    hi = std::max(hi, row);
  }
  return hi;
}

BandCholesky BandCholesky::compute(const SymBand& a, double shift) {
  BandCholesky f;
  f.n_ = a.n;
  f.kd_ = a.kd;
  f.l_ = a.ab;
  if (shift != 0.0) {
    for (int j = 0; j < a.n; ++j) f.lat(0, j) -= shift;
  }
  const int n = f.n_, kd = f.kd_;
  for (int j = 0; j < n; ++j) {
    double d = f.lat(0, j);
    for (int k = std::max(0, j - kd); k < j; ++k) {
      const double ljk = f.lat(j - k, k);
      d -= ljk * ljk;
    }
    if (!(d > 0.0)) {
      f.ok_ = false;
      return f;
    }
    d = std::sqrt(d);
    f.lat(0, j) = d;
    const int ihi = std::min(n - 1, j + kd);
    for (int i = j + 1; i <= ihi; ++i) {
      double s = f.lat(i - j, j);
      for (int k = std::max({0, i - kd, j - kd}); k < j; ++k) {
        s -= f.lat(i - k, k) * f.lat(j - k, k);
      }
      f.lat(i - j, j) = s / d;
    }
  }
  f.ok_ = true;
  return f;
}

void BandCholesky::solve(std::span<const double> b, std::span<double> x) const {
  const int n = n_, kd = kd_;
  // L y = b
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = std::max(0, i - kd); k < i; ++k) s -= lat(i - k, k) * x[k];
    x[i] = s / lat(0, i);
  }
  // L^T x = y
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    const int khi = std::min(n - 1, i + kd);
    for (int k = i + 1; k <= khi; ++k) s -= lat(k - i, i) * x[k];
    x[i] = s / lat(0, i);
  }
}

std::vector<double> BandCholesky::solve(std::span<const double> b) const {
  std::vector<double> x(b.size());
  solve(b, x);
  return x;
}

void GenBand::apply(std::span<const double> x, std::span<double> y) const {
  kern::band_gemv(n, kl, ku, ab.data(), x.data(), y.data());
}

Eigen::MatrixXd GenBand::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const int ilo = std::max(0, j - ku);
    const int ihi = std::min(n - 1, j + kl);
    for (int i = ilo; i <= ihi; ++i) m(i, j) = at(i, j);
  }
  return m;
}

double GenBand::gershgorin_lower() const {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const int jlo = std::max(0, i - kl);
    const int jhi = std::min(n - 1, i + ku);
    double diag = 0.0, offsum = 0.0;
    for (int j = jlo; j <= jhi; ++j) {
      if (j == i)
        diag = at(i, j);
      else
        offsum += std::abs(at(i, j));
    }
    lo = std::min(lo, diag - offsum);
  }
  return lo;
}

double GenBand::inf_norm() const {
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) row += std::abs(at(i, j));
    hi = std::max(hi, row);
  }
  return hi;
}

BandLU BandLU::compute(const GenBand& a) {
  BandLU f;
  f.n_ = a.n;
  f.kl_ = a.kl;
  f.ku_ = a.ku;
  f.lu_ = a.ab;
  const int n = f.n_, kl = f.kl_, ku = f.ku_;
  for (int k = 0; k < n; ++k) {
    const double piv = f.luat(k, k);
    if (std::abs(piv) < 1e-300) {
      f.ok_ = false;
      return f;
    }
    const int ihi = std::min(n - 1, k + kl);
    const int jhi = std::min(n - 1, k + ku);
    for (int i = k + 1; i <= ihi; ++i) {
      const double l = f.luat(i, k) / piv;
      f.luat(i, k) = l;
      for (int j = k + 1; j <= jhi; ++j) {
        if (i - j <= kl && j - i <= ku) f.luat(i, j) -= l * f.luat(k, j);
      }
    }
  }
  f.ok_ = true;
  return f;
}

void BandLU::solve(std::span<const double> b, std::span<double> x) const {
  const int n = n_, kl = kl_, ku = ku_;
  std::copy(b.begin(), b.end(), x.begin());
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = std::max(0, i - kl); k < i; ++k) s -= luat(i, k) * x[k];
    x[i] = s;  // unit lower diagonal
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    const int khi = std::min(n - 1, i + ku);
    for (int k = i + 1; k <= khi; ++k) s -= luat(i, k) * x[k];
    x[i] = s / luat(i, i);
  }
}

std::vector<double> BandLU::solve(std::span<const double> b) const {
  std::vector<double> x(b.size());
  solve(b, x);
  return x;
}

}  // namespace coopvar
