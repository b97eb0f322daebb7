#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "coopvar/banded.hpp"
#include "coopvar/kernels.hpp"
#include "coopvar/rng.hpp"

using namespace coopvar;

namespace {
std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}
}  // namespace

TEST_CASE("parallel dot is bit-identical to the serial reference") {
  Rng rng(1);
  kern::set_parallel(true);
  for (std::size_t n : {1ul, 7ul, 1024ul, 1025ul, 4096ul, 100000ul}) {
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    CHECK(kern::dot(a, b) == kern::dot_serial(a, b));
  }
}

TEST_CASE("blocked dot tracks a long-double reference") {
  Rng rng(2);
  const auto a = random_vector(rng, 50000);
  const auto b = random_vector(rng, 50000);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
  CHECK(std::abs(kern::dot(a, b) - static_cast<double>(acc)) <=
        1e-12 * std::max(1.0, std::abs(static_cast<double>(acc))));
}

TEST_CASE("axpy parallel equals serial") {
  Rng rng(3);
  const auto x = random_vector(rng, 9001);
  auto y1 = random_vector(rng, 9001);
  auto y2 = y1;
  kern::set_parallel(true);
  kern::axpy(0.37, x, y1);
  kern::axpy_serial(0.37, x, y2);
  CHECK(y1 == y2);
}

TEST_CASE("band matvecs match the dense product") {
  Rng rng(4);
  const int n = 123, kd = 5;
  SymBand a(n, kd);
  for (int j = 0; j < n; ++j) {
    a.at(0, j) = 4.0 + rng.uniform();
    for (int d = 1; d <= std::min(kd, n - 1 - j); ++d) a.at(d, j) = rng.uniform(-1.0, 1.0);
  }
  const auto x = random_vector(rng, n);
  std::vector<double> y(n), ys(n);
  kern::set_parallel(true);
  kern::band_symv(n, kd, a.ab.data(), x.data(), y.data());
  kern::band_symv_serial(n, kd, a.ab.data(), x.data(), ys.data());
  CHECK(y == ys);

  const Eigen::MatrixXd ad = a.to_dense();
  Eigen::VectorXd xe(n);
  for (int i = 0; i < n; ++i) xe[i] = x[i];
  const Eigen::VectorXd ye = ad * xe;
  for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(ye[i]).epsilon(1e-13));

  GenBand g(n, 3, 2);
  for (int j = 0; j < n; ++j) {
    for (int i = std::max(0, j - 2); i <= std::min(n - 1, j + 3); ++i)
      g.at(i, j) = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> z(n), zs(n);
  kern::band_gemv(n, 3, 2, g.ab.data(), x.data(), z.data());
  kern::band_gemv_serial(n, 3, 2, g.ab.data(), x.data(), zs.data());
  CHECK(z == zs);
  const Eigen::VectorXd ze = g.to_dense() * xe;
  for (int i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(ze[i]).epsilon(1e-13));
}

TEST_CASE("reductions") {
  std::vector<double> v{3.0, -7.5, 0.25, 6.0};
  CHECK(kern::max_abs(v) == 7.5);
  CHECK(kern::min_value(v) == -7.5);
  CHECK(kern::max_value(v) == 6.0);
}
