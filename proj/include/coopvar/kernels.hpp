#pragma once

#include <cstddef>
#include <span>

// Data-parallel primitives shared by the solvers. Every kernel has a
// `_serial` twin with identical arithmetic; the parallel versions partition
// work into fixed blocks so reductions accumulate in the same order
// regardless of thread count. Tests compare the two paths bit for bit.
namespace coopvar::kern {

bool parallel_enabled();
void set_parallel(bool on);
int max_threads();

// Fixed reduction block; changing it changes rounding, so it is part of the
// numerical contract.
inline constexpr std::size_t dot_block = 1024;

double dot(std::span<const double> a, std::span<const double> b);
double dot_serial(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void axpy_serial(double alpha, std::span<const double> x, std::span<double> y);

double max_abs(std::span<const double> x);
double min_value(std::span<const double> x);
double max_value(std::span<const double> x);

// Symmetric band matvec, lower storage: ab[d + j*(kd+1)] = A(j+d, j).
void band_symv(int n, int kd, const double* ab, const double* x, double* y);
void band_symv_serial(int n, int kd, const double* ab, const double* x, double* y);

// General band matvec: ab[(ku + i - j) + j*(kl+ku+1)] = A(i,j).
void band_gemv(int n, int kl, int ku, const double* ab, const double* x, double* y);
void band_gemv_serial(int n, int kl, int ku, const double* ab, const double* x, double* y);

}  // namespace coopvar::kern
