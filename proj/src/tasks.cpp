#include "coopvar/tasks.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "coopvar/altsys.hpp"
#include "coopvar/continuation.hpp"
#include "coopvar/errors.hpp"
#include "coopvar/outputs.hpp"
#include "coopvar/spectra.hpp"
#include "coopvar/system.hpp"

namespace coopvar {

namespace {

using nlohmann::json;

double resolve_lambda(const TaskConfig& t, double sigma1) {
  if (t.lambda) return *t.lambda;
  if (t.lambda_frac) return *t.lambda_frac * sigma1;
  return 0.0;
}

std::string solution_csv(const Grid& grid, const std::vector<double>& u,
                         const std::vector<double>& v) {
  std::ostringstream csv;
  csv << (grid.dimension == 2 ? "x,y,u,v" : "x,u,v") << "\n";
  for (int idx = 0; idx < grid.total_nodes(); ++idx) {
    const auto c = grid.coord(idx);
    csv << fmt17(c[0]) << ',';
    if (grid.dimension == 2) csv << fmt17(c[1]) << ',';
    csv << fmt17(u[idx]) << ',' << fmt17(v.empty() ? 0.0 : v[idx]) << "\n";
  }
  return csv.str();
}

json solve_result_json(const SolveResult& r) {
  json j;
  j["status"] = solve_status_name(r.status);
  j["gamma"] = r.gamma;
  j["lambda"] = r.lambda;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["energy"] = r.energy;
  j["energy_breakdown"] = {{"dirichlet", r.breakdown.dirichlet},
                           {"mass", r.breakdown.mass},
                           {"nonlocal", r.breakdown.nonlocal},
                           {"potential", r.breakdown.potential}};
  j["grad_norm"] = r.grad_norm;
  j["newton_residual"] = r.newton_residual;
  j["positivity_margin"] = r.positivity_margin;
  j["sup_u"] = r.u.empty() ? 0.0 : kern::max_abs(r.u);
  j["iterations"] = {{"gradient_descent", r.gd_iterations}, {"newton", r.newton_iterations}};
  return j;
}

void task_spectra(const System& sys, const ExperimentConfig& cfg, OutputSink& sink) {
  const double alpha = cfg.task.alpha.value_or(4.0);
  const double beta = cfg.task.beta.value_or(9.0);
  const double s1 = sys.full->smallest_eigenvalue();
  const double s1_0 = sys.zero->smallest_eigenvalue();

  const auto coop = cooperative_principal(*sys.full, {}, {}, alpha, beta);
  double prop_err = 0.0;
  {
    const double sa = std::sqrt(alpha), sb = std::sqrt(beta);
    for (std::size_t i = 0; i < coop.fn.values.size(); ++i)
      prop_err = std::max(prop_err,
                          std::abs(coop.fn.values[i] * sb - coop.fn2.values[i] * sa));
  }
  const auto l1_full = symmetric_block_principal(*sys.full, alpha, beta);
  const auto l1_zero = symmetric_block_principal(*sys.zero, alpha, beta);

  json rep;
  rep["schema_version"] = 1;
  rep["sigma1"] = s1;
  rep["sigma1_0"] = s1_0;
  rep["coop"] = {{"alpha", alpha},
                 {"beta", beta},
                 {"value", coop.value},
                 {"identity_gap", std::abs(coop.value - (s1 - std::sqrt(alpha * beta)))},
                 {"proportionality_error", prop_err},
                 {"residual", coop.residual},
                 {"positivity_margin", coop.positivity_margin}};
  rep["L1"] = {{"full", l1_full.value},
               {"zero", l1_zero.value},
               {"coop_zero", s1_0 - std::sqrt(alpha * beta)}};

  std::ostringstream csv;
  csv << "lambda,lower,sigma,upper\n";
  json table = json::array();
  SpectralBoundOpts sbopts;
  sbopts.cone_samples = cfg.task.n_samples;
  sbopts.cone_seed = cfg.solver.seed;
  for (double frac : cfg.task.lambda_fracs) {
    const double lambda = frac * s1;
    const auto sb = spectral_bound(*sys.full, *sys.zero, lambda, sbopts);
    csv << fmt17(lambda) << ',' << fmt17(sb.lower_bound) << ',' << fmt17(sb.value) << ','
        << fmt17(sb.upper_bound) << "\n";
    table.push_back({{"lambda", lambda},
                     {"lower", sb.lower_bound},
                     {"value", sb.value},
                     {"upper", sb.upper_bound},
                     {"supinf", sb.supinf_estimate},
                     {"pencil_asymmetry", sb.pencil_asymmetry}});
  }
  rep["sigma_table"] = table;
  sink.write_json("spectra.json", rep);
  sink.write("spectra.csv", csv.str());
}

void task_sigma_bound(const System& sys, const ExperimentConfig& cfg, OutputSink& sink) {
  const double s1 = sys.full->smallest_eigenvalue();
  const double lambda = resolve_lambda(cfg.task, s1);
  SpectralBoundOpts opts;
  opts.cone_samples = cfg.task.n_samples;
  opts.cone_seed = cfg.solver.seed;
  const auto sb = spectral_bound(*sys.full, *sys.zero, lambda, opts);

  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const auto sweep = cone_profile_sweep(*sys.full, *sys.zero, lambda,
                                        sb.zero_extension.values, eps);

  json rep;
  rep["schema_version"] = 1;
  rep["lambda"] = lambda;
  rep["value"] = sb.value;
  rep["lower_bound"] = sb.lower_bound;
  rep["upper_bound"] = sb.upper_bound;
  rep["supinf_estimate"] = sb.supinf_estimate;
  rep["supinf_gap"] = sb.value - sb.supinf_estimate;
  rep["pencil_asymmetry"] = sb.pencil_asymmetry;
  rep["minimizer_min"] = sb.minimizer_min;
  rep["minimizer_negative_nodes"] = sb.negative_nodes;
  json sw = json::array();
  for (auto [e, val] : sweep) sw.push_back({{"eps", e}, {"cone_ratio", val}});
  rep["profile_sweep"] = sw;
  sink.write_json("sigma_bound.json", rep);

  std::ostringstream csv;
  csv << (sys.grid.dimension == 2 ? "x,y,w_tilde" : "x,w_tilde") << "\n";
  for (int idx = 0; idx < sys.grid.total_nodes(); ++idx) {
    const auto c = sys.grid.coord(idx);
    csv << fmt17(c[0]) << ',';
    if (sys.grid.dimension == 2) csv << fmt17(c[1]) << ',';
    csv << fmt17(sb.zero_extension.values[idx]) << "\n";
  }
  sink.write("profile.csv", csv.str());
}

void task_solve(const System& sys, const ExperimentConfig& cfg, OutputSink& sink) {
  const Problem prob = sys.problem();
  const double s1 = sys.full->smallest_eigenvalue();
  const double lambda = resolve_lambda(cfg.task, s1);
  double gamma = 0.0;
  if (cfg.task.gamma)
    gamma = *cfg.task.gamma;
  else if (cfg.task.alpha && cfg.task.beta)
    gamma = *cfg.task.alpha * *cfg.task.beta;
  else
    fail(errc::config_invalid, "solve task needs gamma or alpha+beta");

  SolveOpts opts = cfg.solver.solve_opts();
  if (cfg.task.beta) opts.beta = *cfg.task.beta;
  const auto r = minimize_energy(prob, gamma, lambda, {}, opts);

  json rep = solve_result_json(r);
  rep["schema_version"] = 1;
  if (r.status == SolveStatus::converged_positive) {
    const auto [r1, r2] = system_residual(prob, r.u, r.v, r.alpha, r.beta, lambda);
    rep["system_residual"] = {r1, r2};
    rep["ordering_margin"] = ordering_margin(r.u, r.v, r.alpha, r.beta);
  }
  if (cfg.solver.n_starts >= 2) {
    const auto probe =
        uniqueness_probe(prob, gamma, lambda, cfg.solver.n_starts, cfg.solver.seed, opts);
    rep["uniqueness"] = {{"n_starts", probe.n_starts},
                         {"distinct_positive", probe.distinct_positive},
                         {"positive", probe.positive_count},
                         {"zero", probe.zero_count},
                         {"diverged", probe.diverged_count},
                         {"ordering_margin", probe.ordering_margin}};
  }
  sink.write_json("solve.json", rep);
  if (!r.u.empty() && r.status != SolveStatus::diverged)
    sink.write("solution.csv", solution_csv(sys.grid, r.u, r.v));

  if (r.status == SolveStatus::diverged)
    fail(errc::max_iters, "solve diverged (gamma outside the existence interval?)");
}

std::string branch_csv(const Branch& br) {
  std::ostringstream csv;
  csv << "gamma,sup_u,sup_v,energy,min_u_core,mass_frac_plus\n";
  for (const auto& p : br.points) {
    csv << fmt17(p.sol.gamma) << ',' << fmt17(p.sup_u) << ',' << fmt17(p.sup_v) << ','
        << fmt17(p.sol.energy) << ',' << fmt17(p.min_u_core) << ',' << fmt17(p.mass_frac_plus)
        << "\n";
  }
  return csv.str();
}

void task_branch(const System& sys, const ExperimentConfig& cfg, OutputSink& sink) {
  const double s1 = sys.full->smallest_eigenvalue();
  const double lambda = resolve_lambda(cfg.task, s1);
  BranchOpts opts;
  opts.n_points = cfg.task.n_points;
  opts.solve = cfg.solver.solve_opts();
  if (cfg.task.beta) opts.solve.beta = *cfg.task.beta;
  const Branch br = trace_branch(sys, lambda, opts);

  const std::string csv = branch_csv(br);
  sink.write("branch.csv", csv);

  json rep;
  rep["schema_version"] = 1;
  rep["lambda"] = lambda;
  rep["gamma_lo"] = br.gamma_lo;
  rep["gamma_hi"] = br.gamma_hi;
  rep["termination"] = termination_name(br.termination);
  json pts = json::array();
  for (const auto& p : br.points) {
    json pj = solve_result_json(p.sol);
    pj["min_u_core"] = p.min_u_core;
    pj["mass_frac_plus"] = p.mass_frac_plus;
    pj["ordering_margin"] = ordering_margin(p.sol.u, p.sol.v, p.sol.alpha, p.sol.beta);
    pts.push_back(pj);
  }
  rep["points"] = pts;
  sink.write_json("branch.json", rep);

  if (cfg.task.svg) sink.write("branch.svg", render_bifurcation_svg(csv, br.gamma_lo, br.gamma_hi));
}

void task_bifurcation(const System& sys, const ExperimentConfig& cfg, OutputSink& sink) {
  const double s1 = sys.full->smallest_eigenvalue();
  json rows = json::array();
  for (double frac : cfg.task.lambda_fracs) {
    const double lambda = frac * s1;
    const auto rep = locate_bifurcation(*sys.full, lambda);
    const double expected = (s1 - lambda) * (s1 - lambda);
    rows.push_back({{"lambda", lambda},
                    {"gamma_star", rep.gamma_star},
                    {"closed_form", expected},
                    {"rel_err", std::abs(rep.gamma_star - expected) / expected},
                    {"slope_fd", rep.slope_fd},
                    {"slope_closed_form", -1.0 / expected},
                    {"bisect_iters", rep.bisect_iters}});
  }
  json rep;
  rep["schema_version"] = 1;
  rep["sigma1"] = s1;
  rep["points"] = rows;
  sink.write_json("bifurcation.json", rep);
}

void task_cross_validate(const System& sys, const ExperimentConfig& cfg, OutputSink& sink) {
  if (!cfg.task.alpha || !cfg.task.beta)
    fail(errc::config_invalid, "cross-validate task needs alpha and beta");
  const double alpha = *cfg.task.alpha;
  const double beta = *cfg.task.beta;
  const auto iv = lambda_interval(sys, alpha, beta);
  const double s1 = sys.full->smallest_eigenvalue();
  const double s1_0 = sys.zero->smallest_eigenvalue();

  double lo = iv.lo, hi = iv.empty() ? iv.lo + 1.0 : iv.hi;
  const double width = hi - lo;
  lo -= 0.1 * width;
  hi += 0.1 * width;

  std::ostringstream csv;
  csv << "lambda,exists_nonlocal,exists_coupled,agreement\n";
  json rows = json::array();
  const int m = std::max(2, cfg.task.n_lambda);
  for (int k = 0; k < m; ++k) {
    const double lambda = lo + (hi - lo) * k / (m - 1);
    const auto cv = cross_validate(sys, lambda, alpha, beta, cfg.solver.solve_opts());
    const double agreement = std::max(cv.agreement_u, cv.agreement_v);
    csv << fmt17(lambda) << ',' << (cv.exists_nonlocal ? 1 : 0) << ','
        << (cv.exists_coupled ? 1 : 0) << ','
        << ((cv.exists_nonlocal && cv.exists_coupled) ? fmt17(agreement) : std::string())
        << "\n";
    rows.push_back({{"lambda", lambda},
                    {"exists_nonlocal", cv.exists_nonlocal},
                    {"exists_coupled", cv.exists_coupled},
                    {"status_nonlocal", cv.status_nonlocal},
                    {"status_coupled", cv.status_coupled},
                    {"in_alt_interval", cv.in_alt_interval},
                    {"existence_disagreement", cv.existence_disagreement},
                    {"agreement_u", cv.agreement_u},
                    {"agreement_v", cv.agreement_v}});
  }
  json rep;
  rep["schema_version"] = 1;
  rep["alpha"] = alpha;
  rep["beta"] = beta;
  rep["lambda_interval"] = {{"lo", iv.lo}, {"hi", iv.hi}, {"empty", iv.empty()}};
  rep["remark_inequality"] = {{"L1_zero", iv.hi},
                              {"coop_zero", s1_0 - std::sqrt(alpha * beta)},
                              {"holds", iv.hi < s1_0 - std::sqrt(alpha * beta)}};
  rep["sigma1"] = s1;
  rep["sweep"] = rows;
  sink.write_json("cross_validate.json", rep);
  sink.write("sweep.csv", csv.str());
}

}  // namespace

TaskOutcome run_task(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();

  // Validation failures (bad geometry, missing task parameters) happen before
  // anything is written.
  if (cfg.task.name == "solve" && !cfg.task.gamma && !(cfg.task.alpha && cfg.task.beta))
    return {2, "CONFIG_INVALID: solve task needs gamma or alpha+beta"};
  if (cfg.task.name == "cross-validate" && !(cfg.task.alpha && cfg.task.beta))
    return {2, "CONFIG_INVALID: cross-validate task needs alpha and beta"};
  System sys;
  std::string grid_hash;
  try {
    Grid grid = build_grid(cfg.dimension, cfg.lo, cfg.hi, cfg.n, cfg.omega0);
    WeightField weight = build_weight(grid, cfg.weight_profile, cfg.weight_amplitude);
    sys = make_system(std::move(grid), std::move(weight), cfg.nl);
    grid_hash = fnv1a64_hex(grid_to_json(sys.grid).dump());
  } catch (const Error& e) {
    return {2, e.what()};
  }

  OutputSink sink(out_dir, cfg.to_json());
  TaskOutcome outcome;
  try {
    sink.write_json("grid.json", grid_to_json(sys.grid, &sys.weight));
    if (cfg.task.name == "spectra")
      task_spectra(sys, cfg, sink);
    else if (cfg.task.name == "sigma-bound")
      task_sigma_bound(sys, cfg, sink);
    else if (cfg.task.name == "solve")
      task_solve(sys, cfg, sink);
    else if (cfg.task.name == "branch")
      task_branch(sys, cfg, sink);
    else if (cfg.task.name == "bifurcation")
      task_bifurcation(sys, cfg, sink);
    else if (cfg.task.name == "cross-validate")
      task_cross_validate(sys, cfg, sink);
    else
      fail(errc::config_invalid, "unknown task: " + cfg.task.name);
  } catch (const Error& e) {
    outcome.error = e.what();
    outcome.exit_code = e.code() == errc::config_invalid ? 2 : 3;
  } catch (const std::exception& e) {
    outcome.error = e.what();
    outcome.exit_code = 3;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (outcome.exit_code == 3) {
    nlohmann::json err;
    err["schema_version"] = 1;
    err["error"] = outcome.error;
    sink.write_json("error.json", err);
  }
  sink.finish(cfg.task.name, wall, grid_hash, outcome.error);
  return outcome;
}

}  // namespace coopvar
