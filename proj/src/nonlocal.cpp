#include "coopvar/nonlocal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "coopvar/errors.hpp"
#include "coopvar/kernels.hpp"
#include "coopvar/rng.hpp"

namespace coopvar {

namespace {

inline double odd_pow(double u, double p) {
  // |u|^p u, the odd extension of u^{p+1}
  if (p == 1.0) return std::abs(u) * u;
  return std::pow(std::abs(u), p) * u;
}

inline double even_pow(double u, double p2) {
  // |u|^{p+2}
  if (p2 == 3.0) {
    const double a = std::abs(u);
    return a * a * a;
  }
  return std::pow(std::abs(u), p2);
}

struct ResidualParts {
  std::vector<double> r;  // strong form
  double scale = 0.0;     // L2h magnitude of the constituent terms
};

ResidualParts strong_residual(const Problem& p, std::span<const double> u, double gamma,
                              double lambda) {
  const int n = p.op->size();
  const double hd = p.op->cell_measure();
  std::vector<double> au(n);
  p.op->apply(u, au, lambda);
  const auto su = p.op->solve(lambda, u);
  ResidualParts out;
  out.r.resize(n);
  double n_au = 0.0, n_su = 0.0, n_f = 0.0;
  const double pexp = p.nl.p;
  for (int i = 0; i < n; ++i) {
    const double fu = p.weight->values[i] * odd_pow(u[i], pexp);
    out.r[i] = au[i] - gamma * su[i] + fu;
    n_au += au[i] * au[i];
    n_su += su[i] * su[i];
    n_f += fu * fu;
  }
  out.scale = (std::sqrt(n_au) + gamma * std::sqrt(n_su) + std::sqrt(n_f)) * std::sqrt(hd);
  return out;
}

double l2h(std::span<const double> v, double hd) { return std::sqrt(kern::dot(v, v) * hd); }

}  // namespace

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged_positive: return "converged_positive";
    case SolveStatus::converged_to_zero: return "converged_to_zero";
    case SolveStatus::converged_nonpositive: return "converged_nonpositive";
    case SolveStatus::diverged: return "diverged";
  }
  return "unknown";
}

EnergyBreakdown energy(const Problem& p, std::span<const double> u, double gamma, double lambda) {
  const int n = p.op->size();
  const double hd = p.op->cell_measure();
  std::vector<double> au(n);
  p.op->apply(u, au, 0.0);
  EnergyBreakdown e;
  e.dirichlet = 0.5 * kern::dot(u, au) * hd;
  e.mass = -0.5 * lambda * kern::dot(u, u) * hd;
  e.nonlocal = -0.5 * gamma * p.op->quadform(lambda, u);
  const double p2 = p.nl.p + 2.0;
  double pot = 0.0;
  for (int i = 0; i < n; ++i) pot += p.weight->values[i] * even_pow(u[i], p2);
  e.potential = pot * hd / p2;
  return e;
}

std::vector<double> energy_gradient(const Problem& p, std::span<const double> u, double gamma,
                                    double lambda) {
  auto parts = strong_residual(p, u, gamma, lambda);
  const double hd = p.op->cell_measure();
  for (auto& v : parts.r) v *= hd;
  return std::move(parts.r);
}

double relative_residual(const Problem& p, std::span<const double> u, double gamma,
                         double lambda) {
  const auto parts = strong_residual(p, u, gamma, lambda);
  const double num = l2h(parts.r, p.op->cell_measure());
  if (parts.scale == 0.0) return 0.0;
  return num / parts.scale;
}

std::vector<double> recover_v(const ShiftedOperator& op, std::span<const double> u, double lambda,
                              double beta) {
  auto v = op.solve(lambda, u);
  for (auto& x : v) x *= beta;
  return v;
}

std::pair<double, double> system_residual(const Problem& p, std::span<const double> u,
                                          std::span<const double> v, double alpha, double beta,
                                          double lambda) {
  const int n = p.op->size();
  std::vector<double> au(n), av(n);
  p.op->apply(u, au, lambda);
  p.op->apply(v, av, lambda);
  double r1 = 0.0, r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = p.weight->values[i] * odd_pow(u[i], p.nl.p);
    r1 = std::max(r1, std::abs(au[i] - alpha * v[i] + f));
    r2 = std::max(r2, std::abs(av[i] - beta * u[i]));
  }
  return {r1, r2};
}

double ordering_margin(std::span<const double> u, std::span<const double> v, double alpha,
                       double beta) {
  const double sa = std::sqrt(alpha), sb = std::sqrt(beta);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) m = std::min(m, sa * v[i] - sb * u[i]);
  return m;
}

namespace {

void finalize(const Problem& p, SolveResult& r, const SolveOpts& opts) {
  r.beta = opts.beta > 0.0 ? opts.beta : std::sqrt(r.gamma);
  r.alpha = r.gamma / r.beta;
  if (r.status == SolveStatus::diverged) return;
  r.v = recover_v(*p.op, r.u, r.lambda, r.beta);
  r.breakdown = energy(p, r.u, r.gamma, r.lambda);
  r.energy = r.breakdown.total();
  const auto g = energy_gradient(p, r.u, r.gamma, r.lambda);
  r.grad_norm = std::sqrt(kern::dot(g, g));
  r.newton_residual = relative_residual(p, r.u, r.gamma, r.lambda);
  const double mu = kern::min_value(r.u);
  const double mv = r.v.empty() ? 0.0 : kern::min_value(r.v);
  r.positivity_margin = std::min(mu, mv);
  if (kern::max_abs(r.u) < 1e-8)
    r.status = SolveStatus::converged_to_zero;
  else
    r.status = r.positivity_margin > 0.0 ? SolveStatus::converged_positive
                                         : SolveStatus::converged_nonpositive;
}

}  // namespace

namespace {
Eigen::MatrixXd dense_resolvent(const Problem& p, double lambda) {
  const int n = p.op->size();
  const auto fac = p.op->factorization(lambda);
  Eigen::MatrixXd inv(n, n);
#pragma omp parallel for schedule(static) if (kern::parallel_enabled())
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0), x(n);
    e[j] = 1.0;
    fac->solve(e, x);
    for (int i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}
}  // namespace

Eigen::MatrixXd dense_jacobian(const Problem& p, std::span<const double> u, double gamma,
                               double lambda) {
  const int n = p.op->size();
  if (n > 6000) fail(errc::region_too_large, "dense Jacobian capped at 6000 nodes");
  Eigen::MatrixXd jac = p.op->matrix().to_dense() - gamma * dense_resolvent(p, lambda);
  for (int i = 0; i < n; ++i) {
    jac(i, i) += -lambda + p.weight->values[i] * (p.nl.p + 1.0) * std::pow(std::abs(u[i]), p.nl.p);
  }
  return jac;
}

SolveResult newton_solve(const Problem& p, double gamma, double lambda,
                         std::span<const double> init, const SolveOpts& opts) {
  const int n = p.op->size();
  if (n > 6000) fail(errc::region_too_large, "dense Newton capped at 6000 nodes");
  SolveResult r;
  r.gamma = gamma;
  r.lambda = lambda;
  r.u.assign(init.begin(), init.end());
  if (static_cast<int>(r.u.size()) != n) fail(errc::bad_argument, "init has the wrong length");

  if (kern::max_abs(r.u) < 1e-300) {
    finalize(p, r, opts);  // trivial root
    return r;
  }

  // Dense resolvent, reused across Newton sweeps.
  const Eigen::MatrixXd inv = dense_resolvent(p, lambda);
  const Eigen::MatrixXd adense = p.op->matrix().to_dense();

  const double pexp = p.nl.p;
  for (int it = 0; it < opts.newton_max_iters; ++it) {
    const auto parts = strong_residual(p, r.u, gamma, lambda);
    const double rel = parts.scale > 0.0 ? l2h(parts.r, p.op->cell_measure()) / parts.scale : 0.0;
    r.newton_iterations = it;
    if (rel <= opts.newton_tol) break;
    if (it == opts.newton_max_iters - 1) fail(errc::max_iters, "Newton did not converge");

    Eigen::MatrixXd jac = adense - gamma * inv;
    for (int i = 0; i < n; ++i) {
      jac(i, i) += -lambda + p.weight->values[i] * (pexp + 1.0) * std::pow(std::abs(r.u[i]), pexp);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const auto& diag = lu.matrixLU().diagonal();
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < n; ++i) {
      dmin = std::min(dmin, std::abs(diag[i]));
      dmax = std::max(dmax, std::abs(diag[i]));
    }
    if (dmin <= 1e-14 * dmax)
      fail(errc::jacobian_singular, "Jacobian numerically singular (fold or bifurcation in reach)");

    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -parts.r[i];
    const Eigen::VectorXd step = lu.solve(rhs);
    for (int i = 0; i < n; ++i) r.u[i] += step[i];

    if (kern::max_abs(r.u) > opts.blowup_cap) {
      r.status = SolveStatus::diverged;
      return r;
    }
  }

  finalize(p, r, opts);
  return r;
}

SolveResult minimize_energy(const Problem& p, double gamma, double lambda,
                            std::span<const double> init, const SolveOpts& opts) {
  const int n = p.op->size();
  const double hd = p.op->cell_measure();
  SolveResult r;
  r.gamma = gamma;
  r.lambda = lambda;

  std::vector<double> u;
  if (!init.empty()) {
    u.assign(init.begin(), init.end());
  } else {
    // t0 * phi1 with t0 = half the amplitude where the cubic-type term starts
    // to balance the (negative) quadratic one.
    const auto& phi1 = p.op->smallest_eigenvector();
    const double s1 = p.op->smallest_eigenvalue();
    const double norm2 = kern::dot(phi1, phi1) * hd;
    const double q2 = 0.5 * ((s1 - lambda) - gamma / (s1 - lambda)) * norm2;
    const double p2 = p.nl.p + 2.0;
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += p.weight->values[i] * even_pow(phi1[i], p2);
    c *= hd / p2;
    double t0 = 1e-3;
    if (q2 < 0.0 && c > 0.0) t0 = 0.5 * std::pow(-q2 / c, 1.0 / p.nl.p);
    u = phi1;
    for (auto& x : u) x *= t0;
  }

  const double start_amp = std::max(1.0, kern::max_abs(u));
  double e = energy(p, u, gamma, lambda).total();
  double step = 1e-2;
  std::vector<double> trial(n);

  // Collapse toward the trivial state keeps the relative residual constant
  // and the energy nonnegative, so stalled nonnegative-energy descent hands
  // over to Newton early. A state with negative energy can never reach zero
  // (the energy only decreases and vanishes at zero), so this cannot cut a
  // coexistence solve short.
  constexpr int stall_window = 500;
  double stall_res = std::numeric_limits<double>::infinity();
  int stalled_windows = 0;

  int it = 0;
  for (; it < opts.gd_max_iters; ++it) {
    const auto parts = strong_residual(p, u, gamma, lambda);
    const double rel = parts.scale > 0.0 ? l2h(parts.r, hd) / parts.scale : 0.0;
    if (rel <= opts.gd_tol) break;
    if (it % stall_window == 0) {
      if (e > -1e-300 && rel > 0.5 * stall_res) {
        if (++stalled_windows >= 3) break;
      } else {
        stalled_windows = 0;
      }
      stall_res = rel;
    }

    double g2 = 0.0;
    for (double v : parts.r) g2 += v * v;
    g2 *= hd * hd;  // gradient = residual * h^d

    bool accepted = false;
    double t = step;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < n; ++i) trial[i] = u[i] - t * parts.r[i] * hd;
      const double et = energy(p, trial, gamma, lambda).total();
      if (et <= e - 1e-4 * t * g2) {
        u.swap(trial);
        e = et;
        step = std::min(t * 2.0, 1e6);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; hand over to Newton

    const double amp = kern::max_abs(u);
    if (amp > opts.blowup_cap) {
      r.status = SolveStatus::diverged;
      r.u = std::move(u);
      r.gd_iterations = it + 1;
      return r;
    }
    if (amp < opts.zero_tol * start_amp && e > -1e-300) {
      r.u.assign(n, 0.0);
      r.gd_iterations = it + 1;
      finalize(p, r, opts);
      return r;
    }
  }
  r.gd_iterations = it;

  if (kern::max_abs(u) < 1e-8) {
    r.u.assign(n, 0.0);
    finalize(p, r, opts);
    return r;
  }

  if (opts.newton_polish) {
    try {
      SolveResult nr = newton_solve(p, gamma, lambda, u, opts);
      nr.gd_iterations = r.gd_iterations;
      return nr;
    } catch (const Error&) {
      // Newton losing a runaway iterate is the divergence signature; anything
      // else is a genuine failure.
      if (kern::max_abs(u) > 10.0 * start_amp) {
        r.status = SolveStatus::diverged;
        r.u = std::move(u);
        return r;
      }
      throw;
    }
  }
  r.u = std::move(u);
  finalize(p, r, opts);
  return r;
}

UniquenessReport uniqueness_probe(const Problem& p, double gamma, double lambda, int n_starts,
                                  std::uint64_t seed, const SolveOpts& opts) {
  const int n = p.op->size();
  Rng rng(seed);
  const auto& phi1 = p.op->smallest_eigenvector();
  const auto f0 = p.op->factorization(0.0);
  p.op->factorization(lambda);  // shared by the concurrent solves below

  // Mixed low-mode positive fields scaled to a log-uniform amplitude.
  std::vector<std::vector<double>> inits(n_starts);
  for (int s = 0; s < n_starts; ++s) {
    std::vector<double> eta(n), z(n);
    for (auto& v : eta) v = rng.uniform(-1.0, 1.0);
    f0->solve(eta, z);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(z[i]) / phi1[i]);
    const double delta = 0.8 * rng.uniform() / worst;
    std::vector<double> w = phi1;
    kern::axpy(delta, z, w);
    const double amp = rng.log_uniform(1e-2, 1e2);
    const double scale = amp / kern::max_abs(w);
    for (auto& v : w) v *= scale;
    inits[s] = std::move(w);
  }

  std::vector<SolveResult> results(n_starts);
#pragma omp parallel for schedule(dynamic) if (kern::parallel_enabled())
  for (int s = 0; s < n_starts; ++s) {
    results[s] = minimize_energy(p, gamma, lambda, inits[s], opts);
  }

  UniquenessReport rep;
  rep.n_starts = n_starts;
  for (auto& res : results) {
    switch (res.status) {
      case SolveStatus::diverged: ++rep.diverged_count; break;
      case SolveStatus::converged_to_zero: ++rep.zero_count; break;
      default: ++rep.positive_count; break;
    }
    if (res.status != SolveStatus::converged_positive) continue;
    bool matched = false;
    for (const auto& rep_sol : rep.representatives) {
      const double d = rel_maxnorm_diff(res.u, rep_sol.u);
      if (d <= 1e-6) {
        matched = true;
        rep.max_pair_distance = std::max(rep.max_pair_distance, d);
        break;
      }
    }
    if (!matched) rep.representatives.push_back(std::move(res));
  }
  rep.distinct_positive = static_cast<int>(rep.representatives.size());
  if (!rep.representatives.empty()) {
    const auto& r0 = rep.representatives.front();
    rep.ordering_margin = ordering_margin(r0.u, r0.v, r0.alpha, r0.beta);
  }
  return rep;
}

}  // namespace coopvar
