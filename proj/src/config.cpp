#include "coopvar/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "coopvar/errors.hpp"

namespace coopvar {

SolveOpts SolverConfig::solve_opts() const {
  SolveOpts o;
  o.gd_tol = gd_tol;
  o.newton_tol = newton_tol;
  o.gd_max_iters = gd_max_iters;
  o.newton_max_iters = newton_max_iters;
  o.blowup_cap = blowup_cap;
  return o;
}

namespace {

using nlohmann::json;

struct Validator {
  std::vector<std::string> errors;

  void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      errors.push_back(path + ": expected an object");
      return;
    }
    for (const auto& [key, _] : j.items()) {
      if (!allowed.count(key)) errors.push_back(path + ": unknown key '" + key + "'");
    }
  }

  template <typename T>
  bool get(const json& j, const std::string& path, const char* key, T& out, bool required) {
    if (!j.contains(key)) {
      if (required) errors.push_back(path + ": missing required key '" + key + "'");
      return false;
    }
    try {
      out = j.at(key).get<T>();
      return true;
    } catch (const json::exception&) {
      errors.push_back(path + "." + key + ": wrong type");
      return false;
    }
  }
};

const std::set<std::string> kTaskNames = {"spectra",      "sigma-bound", "solve",
                                          "branch",       "bifurcation", "cross-validate"};

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  Validator v;

  v.check_keys(j, "$", {"schema_version", "grid", "weight", "nonlinearity", "solver", "task"});
  if (j.is_object() && j.contains("schema_version")) {
    int sv = 0;
    v.get(j, "$", "schema_version", sv, false);
    if (sv != 1) v.errors.push_back("$.schema_version: unsupported version");
  }

  if (j.is_object() && j.contains("grid")) {
    const json& g = j.at("grid");
    v.check_keys(g, "$.grid", {"dimension", "extent", "n", "omega0"});
    v.get(g, "$.grid", "dimension", cfg.dimension, true);
    if (cfg.dimension != 1 && cfg.dimension != 2)
      v.errors.push_back("$.grid.dimension: must be 1 or 2");

    std::vector<std::vector<double>> extent;
    if (v.get(g, "$.grid", "extent", extent, true)) {
      if (static_cast<int>(extent.size()) != cfg.dimension)
        v.errors.push_back("$.grid.extent: need one [lo,hi] pair per axis");
      for (std::size_t ax = 0; ax < extent.size() && ax < 2; ++ax) {
        if (extent[ax].size() != 2 || !(extent[ax][0] < extent[ax][1])) {
          v.errors.push_back("$.grid.extent: each axis needs lo < hi");
        } else {
          cfg.lo[ax] = extent[ax][0];
          cfg.hi[ax] = extent[ax][1];
        }
      }
    }

    std::vector<int> n;
    if (v.get(g, "$.grid", "n", n, true)) {
      if (static_cast<int>(n.size()) != cfg.dimension)
        v.errors.push_back("$.grid.n: need one count per axis");
      for (std::size_t ax = 0; ax < n.size() && ax < 2; ++ax) {
        if (n[ax] < 2)
          v.errors.push_back("$.grid.n: counts must be >= 2");
        else
          cfg.n[ax] = n[ax];
      }
      if (cfg.dimension == 1) cfg.n[1] = 1;
    }

    if (g.is_object() && g.contains("omega0")) {
      const json& om = g.at("omega0");
      std::string kind;
      v.get(om, "$.grid.omega0", "kind", kind, true);
      if (kind == "interval") {
        v.check_keys(om, "$.grid.omega0", {"kind", "a", "b"});
        cfg.omega0.kind = Omega0Spec::Kind::interval;
        v.get(om, "$.grid.omega0", "a", cfg.omega0.a, true);
        v.get(om, "$.grid.omega0", "b", cfg.omega0.b, true);
      } else if (kind == "disk_shell") {
        v.check_keys(om, "$.grid.omega0", {"kind", "center", "r_inner", "r_outer"});
        cfg.omega0.kind = Omega0Spec::Kind::disk_shell;
        std::vector<double> c;
        if (v.get(om, "$.grid.omega0", "center", c, true) && c.size() == 2)
          cfg.omega0.center = {c[0], c[1]};
        v.get(om, "$.grid.omega0", "r_inner", cfg.omega0.r_inner, true);
        v.get(om, "$.grid.omega0", "r_outer", cfg.omega0.r_outer, true);
        if (!(cfg.omega0.r_inner < cfg.omega0.r_outer))
          v.errors.push_back("$.grid.omega0: need r_inner < r_outer");
      } else if (kind == "rect") {
        v.check_keys(om, "$.grid.omega0", {"kind", "x0", "x1", "y0", "y1"});
        cfg.omega0.kind = Omega0Spec::Kind::rect;
        v.get(om, "$.grid.omega0", "x0", cfg.omega0.rect_lo[0], true);
        v.get(om, "$.grid.omega0", "x1", cfg.omega0.rect_hi[0], true);
        v.get(om, "$.grid.omega0", "y0", cfg.omega0.rect_lo[1], true);
        v.get(om, "$.grid.omega0", "y1", cfg.omega0.rect_hi[1], true);
      } else {
        v.errors.push_back("$.grid.omega0.kind: unknown kind '" + kind + "'");
      }
    } else {
      v.errors.push_back("$.grid: missing required key 'omega0'");
    }
  } else {
    v.errors.push_back("$: missing required key 'grid'");
  }

  if (j.is_object() && j.contains("weight")) {
    const json& w = j.at("weight");
    v.check_keys(w, "$.weight", {"profile", "amplitude"});
    std::string profile = "mollified_bump";
    v.get(w, "$.weight", "profile", profile, false);
    if (profile == "indicator")
      cfg.weight_profile = WeightField::Profile::indicator;
    else if (profile == "mollified_bump")
      cfg.weight_profile = WeightField::Profile::mollified_bump;
    else
      v.errors.push_back("$.weight.profile: unknown profile '" + profile + "'");
    v.get(w, "$.weight", "amplitude", cfg.weight_amplitude, false);
    if (!(cfg.weight_amplitude > 0.0)) v.errors.push_back("$.weight.amplitude: must be positive");
  }

  if (j.is_object() && j.contains("nonlinearity")) {
    const json& nl = j.at("nonlinearity");
    v.check_keys(nl, "$.nonlinearity", {"p"});
    v.get(nl, "$.nonlinearity", "p", cfg.nl.p, false);
    if (!(cfg.nl.p >= 1.0)) v.errors.push_back("$.nonlinearity.p: must be >= 1");
  }

  if (j.is_object() && j.contains("solver")) {
    const json& s = j.at("solver");
    v.check_keys(s, "$.solver",
                 {"gd_tol", "newton_tol", "eig_tol", "gd_max_iters", "newton_max_iters",
                  "eig_max_iters", "blowup_cap", "n_starts", "seed"});
    v.get(s, "$.solver", "gd_tol", cfg.solver.gd_tol, false);
    v.get(s, "$.solver", "newton_tol", cfg.solver.newton_tol, false);
    v.get(s, "$.solver", "eig_tol", cfg.solver.eig_tol, false);
    v.get(s, "$.solver", "gd_max_iters", cfg.solver.gd_max_iters, false);
    v.get(s, "$.solver", "newton_max_iters", cfg.solver.newton_max_iters, false);
    v.get(s, "$.solver", "eig_max_iters", cfg.solver.eig_max_iters, false);
    v.get(s, "$.solver", "blowup_cap", cfg.solver.blowup_cap, false);
    v.get(s, "$.solver", "n_starts", cfg.solver.n_starts, false);
    v.get(s, "$.solver", "seed", cfg.solver.seed, false);
    for (double tol : {cfg.solver.gd_tol, cfg.solver.newton_tol, cfg.solver.eig_tol}) {
      if (!(tol > 0.0)) {
        v.errors.push_back("$.solver: tolerances must be positive");
        break;
      }
    }
    if (!(cfg.solver.blowup_cap > 0.0)) v.errors.push_back("$.solver.blowup_cap: must be positive");
    if (cfg.solver.n_starts < 1) v.errors.push_back("$.solver.n_starts: must be >= 1");
  }

  if (j.is_object() && j.contains("task")) {
    const json& t = j.at("task");
    v.check_keys(t, "$.task",
                 {"name", "lambda", "lambda_frac", "lambda_fracs", "gamma", "alpha", "beta",
                  "n_points", "n_samples", "n_lambda", "svg"});
    v.get(t, "$.task", "name", cfg.task.name, true);
    if (!cfg.task.name.empty() && !kTaskNames.count(cfg.task.name))
      v.errors.push_back("$.task.name: unknown task '" + cfg.task.name + "'");
    double d = 0.0;
    if (v.get(t, "$.task", "lambda", d, false)) cfg.task.lambda = d;
    if (v.get(t, "$.task", "lambda_frac", d, false)) cfg.task.lambda_frac = d;
    if (cfg.task.lambda && cfg.task.lambda_frac)
      v.errors.push_back("$.task: lambda and lambda_frac are mutually exclusive");
    v.get(t, "$.task", "lambda_fracs", cfg.task.lambda_fracs, false);
    if (v.get(t, "$.task", "gamma", d, false)) cfg.task.gamma = d;
    if (v.get(t, "$.task", "alpha", d, false)) cfg.task.alpha = d;
    if (v.get(t, "$.task", "beta", d, false)) cfg.task.beta = d;
    if (cfg.task.alpha.has_value() != cfg.task.beta.has_value())
      v.errors.push_back("$.task: alpha and beta must be given together");
    v.get(t, "$.task", "n_points", cfg.task.n_points, false);
    v.get(t, "$.task", "n_samples", cfg.task.n_samples, false);
    v.get(t, "$.task", "n_lambda", cfg.task.n_lambda, false);
    v.get(t, "$.task", "svg", cfg.task.svg, false);
    if (cfg.task.n_points < 2) v.errors.push_back("$.task.n_points: must be >= 2");
  } else {
    v.errors.push_back("$: missing required key 'task'");
  }

  if (!v.errors.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < v.errors.size(); ++i) {
      if (i) msg << "; ";
      msg << v.errors[i];
    }
    fail(errc::config_invalid, msg.str());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::config_invalid, std::string("JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  nlohmann::json ext = nlohmann::json::array();
  nlohmann::json nn = nlohmann::json::array();
  for (int ax = 0; ax < dimension; ++ax) {
    ext.push_back({lo[ax], hi[ax]});
    nn.push_back(n[ax]);
  }
  nlohmann::json om;
  switch (omega0.kind) {
    case Omega0Spec::Kind::interval:
      om = {{"kind", "interval"}, {"a", omega0.a}, {"b", omega0.b}};
      break;
    case Omega0Spec::Kind::disk_shell:
      om = {{"kind", "disk_shell"},
            {"center", {omega0.center[0], omega0.center[1]}},
            {"r_inner", omega0.r_inner},
            {"r_outer", omega0.r_outer}};
      break;
    case Omega0Spec::Kind::rect:
      om = {{"kind", "rect"},
            {"x0", omega0.rect_lo[0]},
            {"x1", omega0.rect_hi[0]},
            {"y0", omega0.rect_lo[1]},
            {"y1", omega0.rect_hi[1]}};
      break;
  }
  j["grid"] = {{"dimension", dimension}, {"extent", ext}, {"n", nn}, {"omega0", om}};
  j["weight"] = {
      {"profile",
       weight_profile == WeightField::Profile::indicator ? "indicator" : "mollified_bump"},
      {"amplitude", weight_amplitude}};
  j["nonlinearity"] = {{"p", nl.p}};
  j["solver"] = {{"gd_tol", solver.gd_tol},
                 {"newton_tol", solver.newton_tol},
                 {"eig_tol", solver.eig_tol},
                 {"gd_max_iters", solver.gd_max_iters},
                 {"newton_max_iters", solver.newton_max_iters},
                 {"eig_max_iters", solver.eig_max_iters},
                 {"blowup_cap", solver.blowup_cap},
                 {"n_starts", solver.n_starts},
                 {"seed", solver.seed}};
  nlohmann::json t;
  t["name"] = task.name;
  if (task.lambda) t["lambda"] = *task.lambda;
  if (task.lambda_frac) t["lambda_frac"] = *task.lambda_frac;
  t["lambda_fracs"] = task.lambda_fracs;
  if (task.gamma) t["gamma"] = *task.gamma;
  if (task.alpha) t["alpha"] = *task.alpha;
  if (task.beta) t["beta"] = *task.beta;
  t["n_points"] = task.n_points;
  t["n_samples"] = task.n_samples;
  t["n_lambda"] = task.n_lambda;
  t["svg"] = task.svg;
  j["task"] = t;
  return j;
}

}  // namespace coopvar
