#include <doctest.h>

#include <cmath>

#include "coopvar/continuation.hpp"
#include "coopvar/errors.hpp"
#include "coopvar/spectra.hpp"

using namespace coopvar;

namespace {

System make_1d(int n) {
  Omega0Spec s;
  s.kind = Omega0Spec::Kind::interval;
  s.a = 0.3;
  s.b = 0.7;
  Grid g = build_grid(1, {0.0, 0.0}, {1.0, 1.0}, {n, 1}, s);
  WeightField w = build_weight(g, WeightField::Profile::mollified_bump, 1.0);
  return make_system(std::move(g), std::move(w), NonlinearitySpec{1.0});
}

}  // namespace

TEST_CASE("existence interval endpoints") {
  const System sys = make_1d(65);
  const double s1 = sys.full->smallest_eigenvalue();
  for (double lambda : {0.0, s1 / 2.0, 0.99 * s1}) {
    const auto [lo, hi] = existence_interval(sys, lambda);
    CHECK(lo == doctest::Approx((s1 - lambda) * (s1 - lambda)).epsilon(1e-12));
    CHECK(lo < hi);  // never empty for admissible shifts
  }
  // left endpoint collapses as the shift approaches sigma1
  const auto [lo_near, hi_near] = existence_interval(sys, 0.999 * s1);
  CHECK(lo_near < 1e-3);
  CHECK(hi_near > lo_near);
  CHECK_THROWS_AS(existence_interval(sys, s1 + 0.1), Error);
}

TEST_CASE("the squared-gap endpoint on the coarse grid follows the closed form") {
  const System sys = make_1d(9);
  const auto [lo, hi] = existence_interval(sys, 0.0);
  const double h = 0.1;
  const double s1 = 2.0 / (h * h) * (1.0 - std::cos(M_PI * h));  // 9.78869674...
  CHECK(lo == doctest::Approx(s1 * s1).epsilon(1e-12));
  CHECK(hi > lo);
}

TEST_CASE("branch is nodewise monotone with the predicted endpoint behavior") {
  const System sys = make_1d(33);
  BranchOpts opts;
  opts.n_points = 12;
  opts.solve.blowup_cap = 1e14;  // let the grid reach the last target
  const Branch br = trace_branch(sys, 0.0, opts);
  REQUIRE(br.points.size() >= 10);

  for (std::size_t k = 1; k < br.points.size(); ++k) {
    CHECK(br.points[k].sol.gamma > br.points[k - 1].sol.gamma);
    double min_inc = 1e300;
    for (int i = 0; i < sys.full->size(); ++i)
      min_inc = std::min(min_inc, br.points[k].sol.u[i] - br.points[k - 1].sol.u[i]);
    CHECK(min_inc >= -1e-9);
  }
  const double mid = br.points[br.points.size() / 2].sup_u;
  CHECK(br.points.front().sup_u <= 0.05 * mid);
  CHECK(br.points.back().sup_u >= 10.0 * mid);
  for (const auto& pt : br.points) {
    CHECK(pt.sol.gamma > br.gamma_lo);
    CHECK(pt.sol.gamma < br.gamma_hi);
  }
}

TEST_CASE("default cap ends the branch in BLOWUP_CAP on this steep problem") {
  const System sys = make_1d(33);
  BranchOpts opts;
  opts.n_points = 12;
  const Branch br = trace_branch(sys, 0.0, opts);
  CHECK(br.termination == Termination::blowup_cap);
  CHECK(br.points.size() >= 3);
}

TEST_CASE("bifurcation location matches the squared spectral gap") {
  const System sys = make_1d(65);
  const double s1 = sys.full->smallest_eigenvalue();
  for (double frac : {0.0, 0.25, 0.5}) {
    const double lambda = frac * s1;
    const auto rep = locate_bifurcation(*sys.full, lambda);
    const double expect = (s1 - lambda) * (s1 - lambda);
    CHECK(std::abs(rep.gamma_star - expect) <= 1e-8 * expect);
    // transversality: the crossing eigenvalue moves at rate -1/(sigma1-lambda)^2
    CHECK(std::abs(rep.slope_fd + 1.0 / expect) <= 1e-8 / expect);
  }
}

TEST_CASE("implicit-function derivative is positive and matches finite differences") {
  const System sys = make_1d(65);
  const Problem p = sys.problem();
  const auto [glo, ghi] = existence_interval(sys, 0.0);
  const auto r = minimize_energy(p, glo + 0.3 * (ghi - glo), 0.0);
  REQUIRE(r.status == SolveStatus::converged_positive);
  const auto rep = branch_derivative_check(sys, r);
  CHECK(rep.min_w > 0.0);
  CHECK(rep.fd_rel_err <= 1e-4);
}

TEST_CASE("no positive state outside the interval") {
  const System sys = make_1d(65);
  const Problem p = sys.problem();
  const auto [glo, ghi] = existence_interval(sys, 0.0);
  CHECK(minimize_energy(p, 0.9 * glo, 0.0).status == SolveStatus::converged_to_zero);
  CHECK(minimize_energy(p, 1.1 * ghi, 0.0).status == SolveStatus::diverged);
}

TEST_CASE("blow-up probe concentrates the profile on the zero set") {
  const System sys = make_1d(65);
  BlowupOpts opts;
  opts.n_points = 6;
  opts.gap_start = 0.3;
  opts.gap_end = 0.04;
  const auto rep = blowup_probe(sys, 0.0, opts);
  REQUIRE(rep.samples.size() >= 2);
  const auto& first = rep.samples.front();
  const auto& last = rep.samples.back();
  CHECK(last.sup_u > 10.0 * first.sup_u);
  CHECK(last.mass_frac_plus < 0.2 * first.mass_frac_plus);
  CHECK(last.min_u_core > 1e3);
  CHECK(last.cosine_with_bound_profile > 0.9);
  // interior-compact growth and concentration are monotone along the tail
  for (std::size_t k = 1; k < rep.samples.size(); ++k) {
    CHECK(rep.samples[k].min_u_core > rep.samples[k - 1].min_u_core);
    CHECK(rep.samples[k].mass_frac_plus <= rep.samples[k - 1].mass_frac_plus);
  }
}

TEST_CASE("core nodes stay clear of both interfaces") {
  const System sys = make_1d(33);
  const auto core = core_zero_nodes(sys.grid, 2.0 * sys.grid.h[0]);
  CHECK(!core.empty());
  for (int idx : core) {
    CHECK(sys.grid.tag[idx] == Tag::zero);
    CHECK(-sys.grid.signed_distance(idx) > 2.0 * sys.grid.h[0]);
  }
  CHECK(core.size() < static_cast<std::size_t>(sys.grid.count(Tag::zero)));
}
