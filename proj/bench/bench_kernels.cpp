// Timing comparison of the OpenMP kernels against their serial references.
// Usage: bench_kernels [n] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "coopvar/banded.hpp"
#include "coopvar/kernels.hpp"
#include "coopvar/rng.hpp"

namespace {

using clk = std::chrono::steady_clock;

double time_of(int reps, auto&& fn) {
  fn();  // warm up
  const auto t0 = clk::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(clk::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 1 << 20;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 20;

  coopvar::Rng rng(7);
  std::vector<double> a(n), b(n), y(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.uniform(-1.0, 1.0);
    b[i] = rng.uniform(-1.0, 1.0);
  }
  const int kd = 1;
  coopvar::SymBand band(n, kd);
  for (int j = 0; j < n; ++j) {
    band.at(0, j) = 2.0;
    if (j + 1 < n) band.at(1, j) = -1.0;
  }

  std::printf("threads available: %d, n = %d, reps = %d\n", coopvar::kern::max_threads(), n,
              reps);
  std::printf("%-16s %14s %14s %8s\n", "kernel", "serial (s)", "parallel (s)", "speedup");

  volatile double sink = 0.0;

  coopvar::kern::set_parallel(false);
  const double dot_s = time_of(reps, [&] { sink = coopvar::kern::dot(a, b); });
  coopvar::kern::set_parallel(true);
  const double dot_p = time_of(reps, [&] { sink = coopvar::kern::dot(a, b); });
  std::printf("%-16s %14.3e %14.3e %8.2f\n", "dot", dot_s, dot_p, dot_s / dot_p);

  coopvar::kern::set_parallel(false);
  const double sv_s =
      time_of(reps, [&] { coopvar::kern::band_symv(n, kd, band.ab.data(), a.data(), y.data()); });
  coopvar::kern::set_parallel(true);
  const double sv_p =
      time_of(reps, [&] { coopvar::kern::band_symv(n, kd, band.ab.data(), a.data(), y.data()); });
  std::printf("%-16s %14.3e %14.3e %8.2f\n", "band_symv", sv_s, sv_p, sv_s / sv_p);

  coopvar::kern::set_parallel(false);
  const double ax_s = time_of(reps, [&] { coopvar::kern::axpy(0.5, a, y); });
  coopvar::kern::set_parallel(true);
  const double ax_p = time_of(reps, [&] { coopvar::kern::axpy(0.5, a, y); });
  std::printf("%-16s %14.3e %14.3e %8.2f\n", "axpy", ax_s, ax_p, ax_s / ax_p);

  (void)sink;
  return 0;
}
