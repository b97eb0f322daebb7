#include "coopvar/linops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "coopvar/errors.hpp"

namespace coopvar {

namespace {
std::uint64_t key_of(double lambda) { return std::bit_cast<std::uint64_t>(lambda); }
}  // namespace

ShiftedOperator::ShiftedOperator(const Grid& grid, Region region)
    : grid_(&grid), region_(region) {
  nodes_ = grid.region_nodes(region);
  if (nodes_.empty()) fail(errc::empty_region, "operator region has no nodes");
  local_.assign(grid.total_nodes(), -1);
  for (int a = 0; a < static_cast<int>(nodes_.size()); ++a) local_[nodes_[a]] = a;

  const int nx = grid.n[0];
  const int ny = grid.n[1];
  const double cx = 1.0 / (grid.h[0] * grid.h[0]);
  const double cy = grid.dimension == 2 ? 1.0 / (grid.h[1] * grid.h[1]) : 0.0;
  const double diag = 2.0 * cx + (grid.dimension == 2 ? 2.0 * cy : 0.0);

  // Bandwidth = max local-index distance between coupled nodes.
  int kd = 0;
  auto for_each_neighbor = [&](int idx, auto&& fn) {
    const int i = idx % nx;
    const int j = idx / nx;
    if (i > 0) fn(idx - 1, cx);
    if (i < nx - 1) fn(idx + 1, cx);
    if (grid.dimension == 2) {
      if (j > 0) fn(idx - nx, cy);
      if (j < ny - 1) fn(idx + nx, cy);
    }
  };
  for (int a = 0; a < static_cast<int>(nodes_.size()); ++a) {
    for_each_neighbor(nodes_[a], [&](int nidx, double) {
      const int b = local_[nidx];
      if (b >= 0) kd = std::max(kd, std::abs(a - b));
    });
  }
  a_ = SymBand(static_cast<int>(nodes_.size()), kd);
  for (int a = 0; a < static_cast<int>(nodes_.size()); ++a) {
    a_.at(0, a) = diag;
    for_each_neighbor(nodes_[a], [&](int nidx, double c) {
      const int b = local_[nidx];
      if (b > a) a_.at(b - a, a) = -c;
    });
  }

  // Connected components in local indexing, for positivity certificates.
  const Tag t = region == Region::zero_only ? Tag::zero : Tag::plus;
  if (region == Region::full) {
    components_.push_back({});
    components_[0].resize(nodes_.size());
    for (int a = 0; a < static_cast<int>(nodes_.size()); ++a) components_[0][a] = a;
  } else {
    for (const auto& comp : grid.components(t)) {
      components_.emplace_back();
      for (int idx : comp) components_.back().push_back(local_[idx]);
    }
  }
}

void ShiftedOperator::apply(std::span<const double> x, std::span<double> y, double lambda) const {
  a_.apply(x, y, lambda);
}

std::shared_ptr<const BandCholesky> ShiftedOperator::factorization(double lambda) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = factors_.find(key_of(lambda));
    if (it != factors_.end()) return it->second;
  }
  if (lambda > 0.0) {
    const double s1 = smallest_eigenvalue();
    if (lambda >= s1)
      fail(errc::shift_not_admissible,
           "lambda = " + std::to_string(lambda) + " >= sigma1(region) = " + std::to_string(s1));
  }
  auto f = std::make_shared<BandCholesky>(BandCholesky::compute(a_, lambda));
  if (!f->ok())
    fail(errc::shift_not_admissible,
         "factorization of (A - lambda I) failed; lambda = " + std::to_string(lambda));
  std::lock_guard<std::mutex> lock(mu_);
  factors_.emplace(key_of(lambda), f);
  return factors_.at(key_of(lambda));
}

std::vector<double> ShiftedOperator::solve(double lambda, std::span<const double> rhs) const {
  return factorization(lambda)->solve(rhs);
}

double ShiftedOperator::quadform(double lambda, std::span<const double> u) const {
  const auto x = solve(lambda, u);
  return kern::dot(u, x) * cell_measure();
}

double ShiftedOperator::bilinear(double lambda, std::span<const double> u,
                                 std::span<const double> w) const {
  const auto x = solve(lambda, w);
  return kern::dot(u, x) * cell_measure();
}

void ShiftedOperator::ensure_principal() const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (have_principal_) return;
  }
  const auto f0 = factorization(0.0);
  const int n = size();
  std::vector<double> x(n, 1.0), y(n), ax(n);
  double inv = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : x) v *= inv;
  double mu = 0.0;
  double res = 1.0;
  // The eigenvalue is a Rayleigh quotient, so its error is quadratic in the
  // residual; the floor below only needs to sit above the rounding noise of
  // the stencil application.
  const double floor = 32.0 * std::numeric_limits<double>::epsilon() * a_.inf_norm();
  const int max_iters = 20000;
  int it = 0;
  for (; it < max_iters; ++it) {
    f0->solve(x, y);
    const double ny = std::sqrt(kern::dot(y, y));
    for (auto& v : y) v /= ny;
    a_.apply(y, ax);
    mu = kern::dot(y, ax);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = ax[i] - mu * y[i];
      r2 += d * d;
    }
    res = std::sqrt(r2);
    x = y;
    if (res <= std::max(1e-13 * std::max(std::abs(mu), 1.0), floor)) break;
  }
  if (it == max_iters)
    fail(errc::iteration_stalled, "principal eigenvalue iteration did not converge");
  // Orient and normalize to unit max-norm.
  double mx = 0.0;
  for (double v : x) mx = std::max(mx, std::abs(v));
  double sum = 0.0;
  for (double v : x) sum += v;
  const double s = (sum < 0.0 ? -1.0 : 1.0) / mx;
  for (auto& v : x) v *= s;
  std::lock_guard<std::mutex> lock(mu_);
  sigma1_ = mu;
  phi1_ = std::move(x);
  have_principal_ = true;
}

double ShiftedOperator::smallest_eigenvalue() const {
  ensure_principal();
  return sigma1_;
}

const std::vector<double>& ShiftedOperator::smallest_eigenvector() const {
  ensure_principal();
  return phi1_;
}

const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& ShiftedOperator::dense_eig() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!eig_) {
    if (size() > dense_node_cap)
      fail(errc::region_too_large,
           "dense eigendecomposition capped at " + std::to_string(dense_node_cap) + " nodes");
    eig_ = std::make_unique<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>>(a_.to_dense());
    if (eig_->info() != Eigen::Success) fail(errc::iteration_stalled, "dense eigensolver failed");
  }
  return *eig_;
}

std::vector<double> ShiftedOperator::inv_sqrt_apply(double lambda, std::span<const double> u) const {
  if (lambda >= smallest_eigenvalue())
    fail(errc::shift_not_admissible, "lambda >= sigma1(region) in inv_sqrt_apply");
  const auto& eig = dense_eig();
  const int n = size();
  Eigen::VectorXd uv(n);
  for (int i = 0; i < n; ++i) uv[i] = u[i];
  Eigen::VectorXd c = eig.eigenvectors().transpose() * uv;
  for (int i = 0; i < n; ++i) c[i] /= std::sqrt(eig.eigenvalues()[i] - lambda);
  Eigen::VectorXd r = eig.eigenvectors() * c;
  return std::vector<double>(r.data(), r.data() + n);
}

std::vector<double> ShiftedOperator::extend_to_grid(std::span<const double> u) const {
  std::vector<double> full(grid_->total_nodes(), 0.0);
  for (int a = 0; a < size(); ++a) full[nodes_[a]] = u[a];
  return full;
}

std::vector<double> ShiftedOperator::restrict_from_grid(std::span<const double> full) const {
  std::vector<double> u(size());
  for (int a = 0; a < size(); ++a) u[a] = full[nodes_[a]];
  return u;
}

}  // namespace coopvar
