#include "coopvar/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coopvar::kern {

namespace {
std::atomic<bool> g_parallel{
#ifdef _OPENMP
    true
#else
    false
#endif
};

double block_dot(const double* a, const double* b, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
  return s;
}

inline double symv_row(int n, int kd, const double* ab, const double* x, int i) {
  const int ldab = kd + 1;
  double s = ab[0 + i * ldab] * x[i];
  const int dlo = std::min(kd, i);
  for (int d = 1; d <= dlo; ++d) s += ab[d + (i - d) * ldab] * x[i - d];
  const int dhi = std::min(kd, n - 1 - i);
  for (int d = 1; d <= dhi; ++d) s += ab[d + i * ldab] * x[i + d];
  return s;
}

inline double gemv_row(int n, int kl, int ku, const double* ab, const double* x, int i) {
  const int ld = kl + ku + 1;
  const int jlo = std::max(0, i - kl);
  const int jhi = std::min(n - 1, i + ku);
  double s = 0.0;
  for (int j = jlo; j <= jhi; ++j) s += ab[(ku + i - j) + j * ld] * x[j];
  return s;
}
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double dot_serial(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t nb = (n + dot_block - 1) / dot_block;
  double total = 0.0;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const std::size_t lo = bi * dot_block;
    const std::size_t hi = std::min(n, lo + dot_block);
    total += block_dot(a.data(), b.data(), lo, hi);
  }
  return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t nb = (n + dot_block - 1) / dot_block;
  if (!parallel_enabled() || nb < 2) return dot_serial(a, b);
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
  for (long long bi = 0; bi < static_cast<long long>(nb); ++bi) {
    const std::size_t lo = static_cast<std::size_t>(bi) * dot_block;
    const std::size_t hi = std::min(n, lo + dot_block);
    partial[static_cast<std::size_t>(bi)] = block_dot(a.data(), b.data(), lo, hi);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void axpy_serial(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const long long n = static_cast<long long>(x.size());
  if (!parallel_enabled() || n < 4096) {
    axpy_serial(alpha, x, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double min_value(std::span<const double> x) {
  double m = x.empty() ? 0.0 : x[0];
  for (double v : x) m = std::min(m, v);
  return m;
}

double max_value(std::span<const double> x) {
  double m = x.empty() ? 0.0 : x[0];
  for (double v : x) m = std::max(m, v);
  return m;
}

void band_symv_serial(int n, int kd, const double* ab, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] = symv_row(n, kd, ab, x, i);
}

void band_symv(int n, int kd, const double* ab, const double* x, double* y) {
  if (!parallel_enabled() || n < 2048) {
    band_symv_serial(n, kd, ab, x, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) y[i] = symv_row(n, kd, ab, x, i);
}

void band_gemv_serial(int n, int kl, int ku, const double* ab, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] = gemv_row(n, kl, ku, ab, x, i);
}

void band_gemv(int n, int kl, int ku, const double* ab, const double* x, double* y) {
  if (!parallel_enabled() || n < 2048) {
    band_gemv_serial(n, kl, ku, ab, x, y);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) y[i] = gemv_row(n, kl, ku, ab, x, i);
}

}  // namespace coopvar::kern
