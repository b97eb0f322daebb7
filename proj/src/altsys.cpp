#include "coopvar/altsys.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "coopvar/errors.hpp"
#include "coopvar/kernels.hpp"
#include "coopvar/spectra.hpp"

namespace coopvar {

namespace {

inline double odd_pow(double u, double p) {
  if (p == 1.0) return std::abs(u) * u;
  return std::pow(std::abs(u), p) * u;
}

inline double even_pow(double u, double p2) {
  if (p2 == 3.0) {
    const double a = std::abs(u);
    return a * a * a;
  }
  return std::pow(std::abs(u), p2);
}

}  // namespace

double energy_coupled(const Problem& p, std::span<const double> u, std::span<const double> v,
                      double lambda, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(errc::bad_argument, "alpha and beta must be positive");
  const int n = p.op->size();
  const double hd = p.op->cell_measure();
  std::vector<double> au(n), av(n);
  p.op->apply(u, au, 0.0);
  p.op->apply(v, av, 0.0);
  const double p2 = p.nl.p + 2.0;
  double pot = 0.0;
  for (int i = 0; i < n; ++i) pot += p.weight->values[i] * even_pow(u[i], p2);
  return hd * (0.5 / alpha * kern::dot(u, au) + 0.5 / beta * kern::dot(v, av) -
               0.5 * lambda / alpha * kern::dot(u, u) - 0.5 * lambda / beta * kern::dot(v, v) -
               kern::dot(u, v) + pot / (alpha * p2));
}

std::pair<std::vector<double>, std::vector<double>> coupled_gradient(
    const Problem& p, std::span<const double> u, std::span<const double> v, double lambda,
    double alpha, double beta) {
  const int n = p.op->size();
  const double hd = p.op->cell_measure();
  std::vector<double> gu(n), gv(n);
  p.op->apply(u, gu, lambda);
  p.op->apply(v, gv, lambda);
  for (int i = 0; i < n; ++i) {
    gu[i] = hd * ((gu[i] + p.weight->values[i] * odd_pow(u[i], p.nl.p)) / alpha - v[i]);
    gv[i] = hd * (gv[i] / beta - u[i]);
  }
  return {std::move(gu), std::move(gv)};
}

namespace {

// Max-norm residuals of the unscaled coupled system at (u, v).
std::pair<double, double> coupled_residuals(const Problem& p, std::span<const double> u,
                                            std::span<const double> v, double lambda, double alpha,
                                            double beta) {
  const int n = p.op->size();
  std::vector<double> au(n), av(n);
  p.op->apply(u, au, lambda);
  p.op->apply(v, av, lambda);
  double r1 = 0.0, r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    r1 = std::max(r1, std::abs(au[i] - alpha * v[i] + p.weight->values[i] * odd_pow(u[i], p.nl.p)));
    r2 = std::max(r2, std::abs(av[i] - beta * u[i]));
  }
  return {r1, r2};
}

void finalize_coupled(const Problem& p, CoupledState& s) {
  if (s.status == SolveStatus::diverged) return;
  std::tie(s.residual_1, s.residual_2) = coupled_residuals(p, s.u, s.v, s.lambda, s.alpha, s.beta);
  s.energy_J = energy_coupled(p, s.u, s.v, s.lambda, s.alpha, s.beta);
  s.positivity_margin = std::min(kern::min_value(s.u), kern::min_value(s.v));
  const double amp = std::max(kern::max_abs(s.u), kern::max_abs(s.v));
  if (amp < 1e-8)
    s.status = SolveStatus::converged_to_zero;
  else
    s.status = s.positivity_margin > 0.0 ? SolveStatus::converged_positive
                                         : SolveStatus::converged_nonpositive;
}

// Newton on the coupled system with a dense (pivoted) block solve.
bool coupled_newton(const Problem& p, CoupledState& s, const SolveOpts& opts) {
  const int n = p.op->size();
  if (2 * n > 6000) fail(errc::region_too_large, "coupled Newton capped at 3000 nodes");
  const Eigen::MatrixXd adense = p.op->matrix().to_dense();
  for (int it = 0; it < opts.newton_max_iters; ++it) {
    const int nn = 2 * n;
    std::vector<double> au(n), av(n);
    p.op->apply(s.u, au, s.lambda);
    p.op->apply(s.v, av, s.lambda);
    Eigen::VectorXd rhs(nn);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = p.weight->values[i] * odd_pow(s.u[i], p.nl.p);
      const double r1 = au[i] - s.alpha * s.v[i] + f;
      const double r2 = av[i] - s.beta * s.u[i];
      rhs[i] = -r1;
      rhs[n + i] = -r2;
      num += r1 * r1 + r2 * r2;
      den += au[i] * au[i] + av[i] * av[i] + f * f +
             s.alpha * s.alpha * s.v[i] * s.v[i] + s.beta * s.beta * s.u[i] * s.u[i];
    }
    s.newton_iterations = it;
    if (den == 0.0 || std::sqrt(num) <= opts.newton_tol * std::sqrt(den)) return true;
    if (it == opts.newton_max_iters - 1) fail(errc::max_iters, "coupled Newton did not converge");

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nn, nn);
    jac.topLeftCorner(n, n) = adense;
    jac.bottomRightCorner(n, n) = adense;
    for (int i = 0; i < n; ++i) {
      jac(i, i) += -s.lambda +
                   p.weight->values[i] * (p.nl.p + 1.0) * std::pow(std::abs(s.u[i]), p.nl.p);
      jac(n + i, n + i) += -s.lambda;
      jac(i, n + i) = -s.alpha;
      jac(n + i, i) = -s.beta;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const auto& diag = lu.matrixLU().diagonal();
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < nn; ++i) {
      dmin = std::min(dmin, std::abs(diag[i]));
      dmax = std::max(dmax, std::abs(diag[i]));
    }
    if (dmin <= 1e-14 * dmax) fail(errc::jacobian_singular, "coupled Jacobian singular");
    const Eigen::VectorXd step = lu.solve(rhs);
    for (int i = 0; i < n; ++i) {
      s.u[i] += step[i];
      s.v[i] += step[n + i];
    }
    if (std::max(kern::max_abs(s.u), kern::max_abs(s.v)) > opts.blowup_cap) {
      s.status = SolveStatus::diverged;
      return false;
    }
  }
  return true;
}

}  // namespace

CoupledState minimize_coupled(const Problem& p, double lambda, double alpha, double beta,
                              std::span<const double> init_u, std::span<const double> init_v,
                              const SolveOpts& opts) {
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(errc::bad_argument, "alpha and beta must be positive");
  const int n = p.op->size();
  const double hd = p.op->cell_measure();
  CoupledState s;
  s.lambda = lambda;
  s.alpha = alpha;
  s.beta = beta;

  if (!init_u.empty()) {
    s.u.assign(init_u.begin(), init_u.end());
    s.v.assign(init_v.begin(), init_v.end());
  } else {
    // Same eigenmode seed as the scalar path; v scaled by its linear response.
    const auto& phi1 = p.op->smallest_eigenvector();
    const double s1 = p.op->smallest_eigenvalue();
    const double gamma = alpha * beta;
    const double norm2 = kern::dot(phi1, phi1) * hd;
    const double q2 = 0.5 * ((s1 - lambda) - gamma / (s1 - lambda)) * norm2;
    const double p2 = p.nl.p + 2.0;
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += p.weight->values[i] * even_pow(phi1[i], p2);
    c *= hd / p2;
    double t0 = 1e-3;
    if (q2 < 0.0 && c > 0.0) t0 = 0.5 * std::pow(-q2 / c, 1.0 / p.nl.p);
    s.u = phi1;
    s.v = phi1;
    const double vscale = lambda < s1 ? beta / (s1 - lambda) : 1.0;
    for (auto& x : s.u) x *= t0;
    for (auto& x : s.v) x *= t0 * vscale;
  }

  const double start_amp = std::max({1.0, kern::max_abs(s.u), kern::max_abs(s.v)});
  double e = energy_coupled(p, s.u, s.v, lambda, alpha, beta);
  double step = 1e-2;
  std::vector<double> tu(n), tv(n);

  // Same stall rule as the scalar path: nonnegative-energy descent with a
  // non-improving residual is collapsing to zero and Newton confirms it.
  constexpr int stall_window = 500;
  double stall_res = std::numeric_limits<double>::infinity();
  int stalled_windows = 0;

  int it = 0;
  for (; it < opts.gd_max_iters; ++it) {
    auto [gu, gv] = coupled_gradient(p, s.u, s.v, lambda, alpha, beta);
    const double g2 = kern::dot(gu, gu) + kern::dot(gv, gv);
    // Scale-free stationarity test against the gradient pieces.
    std::vector<double> au(n), av(n);
    p.op->apply(s.u, au, lambda);
    p.op->apply(s.v, av, lambda);
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = p.weight->values[i] * odd_pow(s.u[i], p.nl.p);
      den += (au[i] * au[i] + f * f) / (alpha * alpha) + s.v[i] * s.v[i] +
             av[i] * av[i] / (beta * beta) + s.u[i] * s.u[i];
    }
    den = std::sqrt(den) * hd;
    if (den == 0.0 || std::sqrt(g2) <= opts.gd_tol * den) break;
    if (it % stall_window == 0) {
      const double rel = std::sqrt(g2) / den;
      if (e > -1e-300 && rel > 0.5 * stall_res) {
        if (++stalled_windows >= 3) break;
      } else {
        stalled_windows = 0;
      }
      stall_res = rel;
    }

    bool accepted = false;
    double t = step;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < n; ++i) {
        tu[i] = s.u[i] - t * gu[i];
        tv[i] = s.v[i] - t * gv[i];
      }
      const double et = energy_coupled(p, tu, tv, lambda, alpha, beta);
      if (et <= e - 1e-4 * t * g2) {
        s.u.swap(tu);
        s.v.swap(tv);
        e = et;
        step = std::min(t * 2.0, 1e6);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const double amp = std::max(kern::max_abs(s.u), kern::max_abs(s.v));
    if (amp > opts.blowup_cap) {
      s.status = SolveStatus::diverged;
      s.gd_iterations = it + 1;
      return s;
    }
    if (amp < opts.zero_tol * start_amp && e > -1e-300) {
      s.u.assign(n, 0.0);
      s.v.assign(n, 0.0);
      s.gd_iterations = it + 1;
      finalize_coupled(p, s);
      return s;
    }
  }
  s.gd_iterations = it;

  if (std::max(kern::max_abs(s.u), kern::max_abs(s.v)) < 1e-8) {
    s.u.assign(n, 0.0);
    s.v.assign(n, 0.0);
    finalize_coupled(p, s);
    return s;
  }

  if (opts.newton_polish) {
    try {
      if (!coupled_newton(p, s, opts)) return s;  // diverged
    } catch (const Error&) {
      if (std::max(kern::max_abs(s.u), kern::max_abs(s.v)) > 10.0 * start_amp) {
        s.status = SolveStatus::diverged;
        return s;
      }
      throw;
    }
  }
  finalize_coupled(p, s);
  return s;
}

LambdaInterval lambda_interval(const System& sys, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(errc::bad_argument, "alpha and beta must be positive");
  LambdaInterval iv;
  iv.lo = sys.full->smallest_eigenvalue() - std::sqrt(alpha * beta);
  iv.hi = symmetric_block_principal(*sys.zero, alpha, beta).value;
  return iv;
}

CrossValidation cross_validate(const System& sys, double lambda, double alpha, double beta,
                               const SolveOpts& opts) {
  CrossValidation cv;
  cv.lambda = lambda;
  cv.alpha = alpha;
  cv.beta = beta;
  cv.gamma = alpha * beta;
  const Problem prob = sys.problem();
  const double s1 = sys.full->smallest_eigenvalue();
  cv.nonlocal_admissible = lambda < s1;
  const auto alt = lambda_interval(sys, alpha, beta);
  cv.in_alt_interval = !alt.empty() && lambda > alt.lo && lambda < alt.hi;

  SolveResult nl;
  if (cv.nonlocal_admissible) {
    SolveOpts nlopts = opts;
    nlopts.beta = beta;
    nl = minimize_energy(prob, cv.gamma, lambda, {}, nlopts);
    cv.exists_nonlocal = nl.status == SolveStatus::converged_positive;
    cv.status_nonlocal = solve_status_name(nl.status);
  } else {
    cv.status_nonlocal = "inadmissible";
  }

  const auto cp = minimize_coupled(prob, lambda, alpha, beta, {}, {}, opts);
  cv.exists_coupled = cp.status == SolveStatus::converged_positive;
  cv.status_coupled = solve_status_name(cp.status);

  if (cv.exists_nonlocal && cv.exists_coupled) {
    cv.agreement_u = rel_maxnorm_diff(nl.u, cp.u);
    cv.agreement_v = rel_maxnorm_diff(nl.v, cp.v);
  }
  cv.existence_disagreement = cv.exists_nonlocal != cv.exists_coupled;
  return cv;
}

}  // namespace coopvar
