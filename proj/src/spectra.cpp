#include "coopvar/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coopvar/errors.hpp"
#include "coopvar/kernels.hpp"

namespace coopvar {

namespace {

// Positivity margin over the connected component holding the largest entry.
double margin_on_support(const ShiftedOperator& op, std::span<const double> x) {
  const auto& comps = op.component_locals();
  if (comps.size() == 1) return kern::min_value(x);
  int best = 0;
  double best_amp = -1.0;
  for (int c = 0; c < static_cast<int>(comps.size()); ++c) {
    double amp = 0.0;
    for (int a : comps[c]) amp = std::max(amp, std::abs(x[a]));
    if (amp > best_amp) {
      best_amp = amp;
      best = c;
    }
  }
  double m = std::numeric_limits<double>::infinity();
  for (int a : comps[best]) m = std::min(m, x[a]);
  return m;
}

struct BlockIterResult {
  double value;
  std::vector<double> x;  // interleaved (u0, v0, u1, v1, ...)
  double residual;
  int iterations;
};

// Inverse power iteration on a block operator given in general band form,
// shifted strictly below its Gershgorin bound so the resolvent is an inverse
// M-matrix and keeps the iterate positive. row_weight carries the diagonal
// similarity that symmetrizes the block; evaluating the Rayleigh quotient in
// that geometry makes the eigenvalue quadratically accurate in the residual.
BlockIterResult block_inverse_iteration(const GenBand& m, const EigOpts& opts,
                                        bool check_positive, double even_weight = 1.0,
                                        double odd_weight = 1.0) {
  const int n2 = m.n;
  const double shift = m.gershgorin_lower() - 1.0;
  GenBand ms = m;
  for (int i = 0; i < n2; ++i) ms.at(i, i) -= shift;
  const BandLU lu = BandLU::compute(ms);
  if (!lu.ok()) fail(errc::iteration_stalled, "block factorization failed");

  std::vector<double> x(n2, 1.0 / std::sqrt(static_cast<double>(n2)));
  std::vector<double> y(n2), my(n2);
  double mu = 0.0, res = 0.0;
  const double floor = 32.0 * std::numeric_limits<double>::epsilon() * m.inf_norm();
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    lu.solve(x, y);
    if (check_positive && kern::min_value(y) <= 0.0)
      fail(errc::not_positive, "inverse iteration produced a sign-changing sweep");
    const double ny = std::sqrt(kern::dot(y, y));
    for (auto& v : y) v /= ny;
    m.apply(y, my);
    double num = 0.0, den = 0.0, r2 = 0.0;
    for (int i = 0; i < n2; ++i) {
      const double w = (i & 1) ? odd_weight : even_weight;
      num += w * y[i] * my[i];
      den += w * y[i] * y[i];
    }
    mu = num / den;
    for (int i = 0; i < n2; ++i) {
      const double d = my[i] - mu * y[i];
      r2 += d * d;
    }
    res = std::sqrt(r2);
    x = y;
    if (res <= std::max(opts.tol * std::max(std::abs(mu), 1.0), floor)) break;
  }
  if (it >= opts.max_iters)
    fail(errc::iteration_stalled, "block inverse iteration did not converge");
  return {mu, std::move(x), res, it + 1};
}

GenBand assemble_block(const SymBand& a, std::span<const double> v1, std::span<const double> v2,
                       double scale1, double scale2, double coupling12, double coupling21) {
  const int n = a.n;
  GenBand m(2 * n, 2 * a.kd + 1, 2 * a.kd + 1);
  for (int j = 0; j < n; ++j) {
    m.at(2 * j, 2 * j) = scale1 * a.at(0, j) + (v1.empty() ? 0.0 : v1[j]);
    m.at(2 * j + 1, 2 * j + 1) = scale2 * a.at(0, j) + (v2.empty() ? 0.0 : v2[j]);
    m.at(2 * j, 2 * j + 1) = coupling12;
    m.at(2 * j + 1, 2 * j) = coupling21;
    for (int d = 1; d <= std::min(a.kd, n - 1 - j); ++d) {
      const double val = a.at(d, j);
      if (val == 0.0) continue;
      m.at(2 * (j + d), 2 * j) = scale1 * val;
      m.at(2 * j, 2 * (j + d)) = scale1 * val;
      m.at(2 * (j + d) + 1, 2 * j + 1) = scale2 * val;
      m.at(2 * j + 1, 2 * (j + d) + 1) = scale2 * val;
    }
  }
  return m;
}

EigenPair finish_block_pair(const ShiftedOperator& op, BlockIterResult&& r) {
  const int n = op.size();
  EigenPair out;
  out.value = r.value;
  out.residual = r.residual;
  out.iterations = r.iterations;
  out.fn.region = out.fn2.region = op.region();
  out.fn.values.resize(n);
  out.fn2.values.resize(n);
  double mx = 0.0;
  for (double v : r.x) mx = std::max(mx, std::abs(v));
  for (int i = 0; i < n; ++i) {
    out.fn.values[i] = r.x[2 * i] / mx;
    out.fn2.values[i] = r.x[2 * i + 1] / mx;
  }
  out.positivity_margin = std::min(margin_on_support(op, out.fn.values),
                                   margin_on_support(op, out.fn2.values));
  return out;
}

}  // namespace

EigenPair principal_eigenpair(const ShiftedOperator& op, const EigOpts&) {
  EigenPair out;
  out.value = op.smallest_eigenvalue();
  out.fn.region = op.region();
  out.fn.values = op.smallest_eigenvector();  // unit max-norm, nonnegative
  const int n = op.size();
  std::vector<double> ax(n);
  op.apply(out.fn.values, ax);
  double r2 = 0.0, n2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = ax[i] - out.value * out.fn.values[i];
    r2 += d * d;
    n2 += out.fn.values[i] * out.fn.values[i];
  }
  out.residual = std::sqrt(r2 / n2);
  out.positivity_margin = margin_on_support(op, out.fn.values);
  out.iterations = 0;
  return out;
}

EigenPair cooperative_principal(const ShiftedOperator& op, std::span<const double> v1,
                                std::span<const double> v2, double alpha, double beta,
                                const EigOpts& opts) {
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(errc::bad_argument, "alpha and beta must be positive");
  const GenBand m = assemble_block(op.matrix(), v1, v2, 1.0, 1.0, -alpha, -beta);
  // diag(sqrt(beta/alpha), sqrt(alpha/beta)) symmetrizes the coupling
  return finish_block_pair(
      op, block_inverse_iteration(m, opts, /*check_positive=*/true, std::sqrt(beta / alpha),
                                  std::sqrt(alpha / beta)));
}

double cooperative_principal_dense(const ShiftedOperator& op, std::span<const double> v1,
                                   std::span<const double> v2, double alpha, double beta) {
  const int n = op.size();
  if (2 * n > 5000) fail(errc::region_too_large, "dense block cross-check capped at 5000 nodes");
  Eigen::MatrixXd a = op.matrix().to_dense();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const double c = std::sqrt(alpha * beta);
  m.topLeftCorner(n, n) = a;
  m.bottomRightCorner(n, n) = a;
  for (int i = 0; i < n; ++i) {
    if (!v1.empty()) m(i, i) += v1[i];
    if (!v2.empty()) m(n + i, n + i) += v2[i];
    m(i, n + i) = -c;
    m(n + i, i) = -c;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

EigenPair symmetric_block_principal(const ShiftedOperator& op, double alpha, double beta,
                                    const EigOpts& opts) {
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(errc::bad_argument, "alpha and beta must be positive");
  const double s1 = beta / (alpha + beta);   // 1/(1 + alpha/beta)
  const double s2 = alpha / (alpha + beta);  // 1/(1 + beta/alpha)
  const double c = alpha * beta / (alpha + beta);
  const GenBand m = assemble_block(op.matrix(), {}, {}, s1, s2, -c, -c);
  return finish_block_pair(op, block_inverse_iteration(m, opts, /*check_positive=*/true));
}

double cone_ratio(const ShiftedOperator& full, const ShiftedOperator& zero, double lambda,
                  std::span<const double> w) {
  const int n = full.size();
  std::vector<double> p(n);
  full.apply(w, p, lambda);
  const auto q = full.solve(lambda, w);
  double worst = std::numeric_limits<double>::infinity();
  for (int idx : zero.nodes()) worst = std::min(worst, p[idx] / q[idx]);
  return worst;
}

double cone_estimate(const ShiftedOperator& full, const ShiftedOperator& zero, double lambda,
                     int n_samples, Rng& rng, const std::vector<double>* minimizer_extension) {
  const int n = full.size();
  const auto& phi1 = full.smallest_eigenvector();
  full.factorization(lambda);  // build once; samples reuse it

  std::vector<std::vector<double>> samples;
  samples.push_back(phi1);
  if (minimizer_extension != nullptr) {
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      std::vector<double> w = *minimizer_extension;
      kern::axpy(eps, phi1, w);
      samples.push_back(std::move(w));
    }
  }
  const auto f0 = full.factorization(0.0);
  while (static_cast<int>(samples.size()) < n_samples) {
    std::vector<double> eta(n);
    for (auto& v : eta) v = rng.uniform(-1.0, 1.0);
    std::vector<double> z(n);
    f0->solve(eta, z);  // smooth the noise so the bump is grid-resolved
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(z[i]) / phi1[i]);
    const double delta = 0.9 * rng.uniform() / worst;
    std::vector<double> w = phi1;
    kern::axpy(delta, z, w);
    samples.push_back(std::move(w));
  }

  std::vector<double> vals(samples.size());
#pragma omp parallel for schedule(dynamic) if (kern::parallel_enabled())
  for (long long s = 0; s < static_cast<long long>(samples.size()); ++s) {
    vals[static_cast<std::size_t>(s)] = cone_ratio(full, zero, lambda, samples[s]);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double v : vals) best = std::max(best, v);
  return best;
}

std::vector<std::pair<double, double>> cone_profile_sweep(
    const ShiftedOperator& full, const ShiftedOperator& zero, double lambda,
    std::span<const double> minimizer_extension, std::span<const double> epsilons) {
  const auto& phi1 = full.smallest_eigenvector();
  std::vector<std::pair<double, double>> table;
  table.reserve(epsilons.size());
  for (double eps : epsilons) {
    std::vector<double> w(minimizer_extension.begin(), minimizer_extension.end());
    kern::axpy(eps, phi1, w);
    table.emplace_back(eps, cone_ratio(full, zero, lambda, w));
  }
  return table;
}

SpectralBoundResult spectral_bound(const ShiftedOperator& full, const ShiftedOperator& zero,
                                   double lambda, const SpectralBoundOpts& opts) {
  const double s1 = full.smallest_eigenvalue();
  const double s1_0 = zero.smallest_eigenvalue();
  if (lambda >= s1)
    fail(errc::shift_not_admissible, "lambda >= sigma1(full) in spectral_bound");
  if (lambda >= s1_0)
    fail(errc::shift_not_admissible, "lambda >= sigma1(zero region) in spectral_bound");

  const int m = zero.size();
  const int n = full.size();
  Eigen::MatrixXd a0 = zero.matrix().to_dense();
  for (int i = 0; i < m; ++i) a0(i, i) -= lambda;

  Eigen::MatrixXd b(m, m);
  const auto fac = full.factorization(lambda);
  const auto& znodes = zero.nodes();
#pragma omp parallel for schedule(static) if (kern::parallel_enabled())
  for (int j = 0; j < m; ++j) {
    std::vector<double> e(n, 0.0), x(n);
    e[znodes[j]] = 1.0;
    fac->solve(e, x);
    for (int i = 0; i < m; ++i) b(i, j) = x[znodes[i]];
  }

  double asym = 0.0, bmax = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      asym = std::max(asym, std::abs(b(i, j) - b(j, i)));
      bmax = std::max(bmax, std::abs(b(i, j)));
    }
  Eigen::MatrixXd bs = 0.5 * (b + b.transpose());

  if (opts.denominator_restricted) {
    // Comparison path: the quotient's denominator integrated over the zero
    // region only, through the dense inverse square root.
    Eigen::MatrixXd sr(m, m);
    std::vector<Eigen::VectorXd> cols(m);
    for (int j = 0; j < m; ++j) {
      std::vector<double> e(n, 0.0);
      e[znodes[j]] = 1.0;
      const auto su = full.inv_sqrt_apply(lambda, e);
      Eigen::VectorXd c(m);
      for (int i = 0; i < m; ++i) c[i] = su[znodes[i]];
      cols[j] = c;
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) sr(i, j) = cols[i].dot(cols[j]);
    bs = 0.5 * (sr + sr.transpose());
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(a0, bs);
  if (ges.info() != Eigen::Success) fail(errc::iteration_stalled, "pencil eigensolver failed");

  SpectralBoundResult out;
  out.value = ges.eigenvalues()(0);
  out.pencil_asymmetry = bmax > 0.0 ? asym / bmax : 0.0;
  out.lower_bound = (s1 - lambda) * (s1 - lambda);
  out.upper_bound = (s1_0 - lambda) * (s1_0 - lambda);

  Eigen::VectorXd v = ges.eigenvectors().col(0);
  if (v.sum() < 0.0) v = -v;
  const double nrm = std::sqrt(v.squaredNorm() * zero.cell_measure());
  v /= nrm;
  out.minimizer.region = Region::zero_only;
  out.minimizer.values.assign(v.data(), v.data() + m);
  out.minimizer_min = kern::min_value(out.minimizer.values);
  for (double x : out.minimizer.values) out.negative_nodes += (x < 0.0);
  out.zero_extension.region = Region::full;
  out.zero_extension.values = zero.extend_to_grid(out.minimizer.values);

  if (opts.cone_samples > 0) {
    Rng rng(opts.cone_seed);
    out.supinf_estimate =
        cone_estimate(full, zero, lambda, opts.cone_samples, rng, &out.zero_extension.values);
  } else {
    out.supinf_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace coopvar
