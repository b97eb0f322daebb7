#include "coopvar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "coopvar/errors.hpp"

namespace coopvar {

namespace {

// Strict containment with a relative slack so nodes that land on the
// geometric interface only through rounding stay on the PLUS side.
bool strictly_inside(double x, double a, double b, double eps) {
  return x > a + eps && x < b - eps;
}

Tag tag_of(const Omega0Spec& s, double x, double y, double eps) {
  switch (s.kind) {
    case Omega0Spec::Kind::interval:
      return strictly_inside(x, s.a, s.b, eps) ? Tag::zero : Tag::plus;
    case Omega0Spec::Kind::disk_shell: {
      const double r = std::hypot(x - s.center[0], y - s.center[1]);
      return strictly_inside(r, s.r_inner, s.r_outer, eps) ? Tag::plus : Tag::zero;
    }
    case Omega0Spec::Kind::rect:
      return (strictly_inside(x, s.rect_lo[0], s.rect_hi[0], eps) &&
              strictly_inside(y, s.rect_lo[1], s.rect_hi[1], eps))
                 ? Tag::zero
                 : Tag::plus;
  }
  return Tag::plus;
}

}  // namespace

int Grid::count(Tag t) const {
  int c = 0;
  for (Tag v : tag) c += (v == t);
  return c;
}

std::vector<int> Grid::region_nodes(Region r) const {
  std::vector<int> out;
  out.reserve(tag.size());
  for (int idx = 0; idx < total_nodes(); ++idx) {
    if (r == Region::full || tag[idx] == Tag::zero) out.push_back(idx);
  }
  return out;
}

std::vector<std::vector<int>> Grid::components(Tag t) const {
  const int total = total_nodes();
  std::vector<int> comp(total, -1);
  std::vector<std::vector<int>> comps;
  for (int start = 0; start < total; ++start) {
    if (tag[start] != t || comp[start] >= 0) continue;
    comps.emplace_back();
    std::queue<int> q;
    q.push(start);
    comp[start] = static_cast<int>(comps.size()) - 1;
    while (!q.empty()) {
      const int idx = q.front();
      q.pop();
      comps.back().push_back(idx);
      const int i = idx % n[0];
      const int j = idx / n[0];
      const int nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (auto [ni, nj] : nbrs) {
        if (ni < 0 || ni >= n[0] || nj < 0 || nj >= n[1]) continue;
        const int nidx = index(ni, nj);
        if (tag[nidx] == t && comp[nidx] < 0) {
          comp[nidx] = comp[idx];
          q.push(nidx);
        }
      }
    }
  }
  return comps;
}

double Grid::signed_distance(int idx) const {
  const auto c = coord(idx);
  const double x = c[0], y = c[1];
  switch (omega0.kind) {
    case Omega0Spec::Kind::interval:
      // PLUS side is outside (a,b)
      return std::max(omega0.a - x, x - omega0.b);
    case Omega0Spec::Kind::disk_shell: {
      const double r = std::hypot(x - omega0.center[0], y - omega0.center[1]);
      return std::min(r - omega0.r_inner, omega0.r_outer - r);
    }
    case Omega0Spec::Kind::rect: {
      const double dx = std::max(omega0.rect_lo[0] - x, x - omega0.rect_hi[0]);
      const double dy = std::max(omega0.rect_lo[1] - y, y - omega0.rect_hi[1]);
      return std::max(dx, dy);
    }
  }
  return 0.0;
}

double Grid::boundary_distance(int idx) const {
  const auto c = coord(idx);
  double d = std::min(c[0] - lo[0], hi[0] - c[0]);
  if (dimension == 2) d = std::min({d, c[1] - lo[1], hi[1] - c[1]});
  return d;
}

Grid build_grid(int dimension, const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                const std::array<int, 2>& n, const Omega0Spec& omega0) {
  if (dimension != 1 && dimension != 2) fail(errc::bad_argument, "dimension must be 1 or 2");
  Grid g;
  g.dimension = dimension;
  g.lo = lo;
  g.hi = hi;
  g.n = n;
  if (dimension == 1) g.n[1] = 1;
  for (int ax = 0; ax < dimension; ++ax) {
    // n >= 8 is the supported regime; anything below 2 cannot carry a stencil.
    if (g.n[ax] < 2) fail(errc::bad_argument, "n must be >= 2 per axis");
    if (!(hi[ax] > lo[ax])) fail(errc::bad_argument, "extent must be increasing");
    g.h[ax] = (hi[ax] - lo[ax]) / (g.n[ax] + 1);
  }
  if (dimension == 1) g.h[1] = 0.0;
  if (dimension == 1 && omega0.kind != Omega0Spec::Kind::interval)
    fail(errc::bad_argument, "1-D grids take an interval omega0 spec");
  if (dimension == 2 && omega0.kind == Omega0Spec::Kind::interval)
    fail(errc::bad_argument, "2-D grids take disk_shell or rect omega0 specs");
  g.omega0 = omega0;

  const double eps = 1e-9 * std::min(g.h[0], dimension == 2 ? g.h[1] : g.h[0]);
  g.tag.resize(g.total_nodes());
  for (int idx = 0; idx < g.total_nodes(); ++idx) {
    const auto c = g.coord(idx);
    g.tag[idx] = tag_of(omega0, c[0], c[1], eps);
  }

  const int nzero = g.count(Tag::zero);
  const int nplus = g.count(Tag::plus);
  if (nzero == 0) fail(errc::empty_region, "omega0 spec contains no grid node (empty region)");
  if (nplus == 0) fail(errc::empty_region, "positive region contains no grid node (empty region)");

  if (omega0.kind == Omega0Spec::Kind::disk_shell) {
    // Canonical configuration: the annulus must stay clear of the outer boundary.
    for (int idx = 0; idx < g.total_nodes(); ++idx) {
      if (g.tag[idx] != Tag::plus) continue;
      const int i = idx % g.n[0];
      const int j = idx / g.n[0];
      if (i == 0 || i == g.n[0] - 1 || j == 0 || j == g.n[1] - 1)
        fail(errc::bad_argument, "annulus touches the outer boundary in the canonical configuration");
    }
  }
  return g;
}

namespace {
// Cubic smoothstep on [0,1].
double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}
}  // namespace

WeightField build_weight(const Grid& grid, WeightField::Profile profile, double amplitude) {
  if (!(amplitude > 0.0)) fail(errc::bad_argument, "weight amplitude must be positive");
  WeightField w;
  w.profile = profile;
  w.amplitude = amplitude;
  w.values.assign(grid.total_nodes(), 0.0);
  const double band = 4.0 * std::min(grid.h[0], grid.dimension == 2 ? grid.h[1] : grid.h[0]);
  for (int idx = 0; idx < grid.total_nodes(); ++idx) {
    if (grid.tag[idx] != Tag::plus) continue;  // a == 0 on the zero set for every profile
    if (profile == WeightField::Profile::indicator) {
      w.values[idx] = amplitude;
    } else {
      const double d = grid.signed_distance(idx);
      const double s = smoothstep(d / band);
      w.values[idx] = amplitude * s * s;
    }
  }
  return w;
}

nlohmann::json grid_to_json(const Grid& g, const WeightField* w) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["dimension"] = g.dimension;
  j["extent"] = nlohmann::json::array();
  for (int ax = 0; ax < g.dimension; ++ax)
    j["extent"].push_back({g.lo[ax], g.hi[ax]});
  j["n"] = nlohmann::json::array();
  for (int ax = 0; ax < g.dimension; ++ax) j["n"].push_back(g.n[ax]);

  nlohmann::json om;
  switch (g.omega0.kind) {
    case Omega0Spec::Kind::interval:
      om = {{"kind", "interval"}, {"a", g.omega0.a}, {"b", g.omega0.b}};
      break;
    case Omega0Spec::Kind::disk_shell:
      om = {{"kind", "disk_shell"},
            {"center", {g.omega0.center[0], g.omega0.center[1]}},
            {"r_inner", g.omega0.r_inner},
            {"r_outer", g.omega0.r_outer}};
      break;
    case Omega0Spec::Kind::rect:
      om = {{"kind", "rect"},
            {"x0", g.omega0.rect_lo[0]},
            {"x1", g.omega0.rect_hi[0]},
            {"y0", g.omega0.rect_lo[1]},
            {"y1", g.omega0.rect_hi[1]}};
      break;
  }
  j["omega0"] = om;

  // Tags as run-length encoding of [value, count] pairs in index order.
  nlohmann::json rle = nlohmann::json::array();
  int idx = 0;
  const int total = g.total_nodes();
  while (idx < total) {
    const Tag t = g.tag[idx];
    int run = 0;
    while (idx + run < total && g.tag[idx + run] == t) ++run;
    rle.push_back({t == Tag::zero ? "zero" : "plus", run});
    idx += run;
  }
  j["tags_rle"] = rle;

  if (w != nullptr) {
    j["weight"] = {{"profile", w->profile == WeightField::Profile::indicator ? "indicator"
                                                                             : "mollified_bump"},
                   {"amplitude", w->amplitude},
                   {"values", w->values}};
  }
  return j;
}

Grid grid_from_json(const nlohmann::json& j, WeightField* w) {
  Grid g;
  g.dimension = j.at("dimension").get<int>();
  const auto& ext = j.at("extent");
  for (int ax = 0; ax < g.dimension; ++ax) {
    g.lo[ax] = ext.at(ax).at(0).get<double>();
    g.hi[ax] = ext.at(ax).at(1).get<double>();
  }
  const auto& nn = j.at("n");
  g.n = {nn.at(0).get<int>(), g.dimension == 2 ? nn.at(1).get<int>() : 1};
  for (int ax = 0; ax < g.dimension; ++ax) g.h[ax] = (g.hi[ax] - g.lo[ax]) / (g.n[ax] + 1);

  const auto& om = j.at("omega0");
  const std::string kind = om.at("kind").get<std::string>();
  if (kind == "interval") {
    g.omega0.kind = Omega0Spec::Kind::interval;
    g.omega0.a = om.at("a").get<double>();
    g.omega0.b = om.at("b").get<double>();
  } else if (kind == "disk_shell") {
    g.omega0.kind = Omega0Spec::Kind::disk_shell;
    g.omega0.center = {om.at("center").at(0).get<double>(), om.at("center").at(1).get<double>()};
    g.omega0.r_inner = om.at("r_inner").get<double>();
    g.omega0.r_outer = om.at("r_outer").get<double>();
  } else if (kind == "rect") {
    g.omega0.kind = Omega0Spec::Kind::rect;
    g.omega0.rect_lo = {om.at("x0").get<double>(), om.at("y0").get<double>()};
    g.omega0.rect_hi = {om.at("x1").get<double>(), om.at("y1").get<double>()};
  } else {
    fail(errc::schema_mismatch, "unknown omega0 kind: " + kind);
  }

  g.tag.clear();
  g.tag.reserve(g.total_nodes());
  for (const auto& run : j.at("tags_rle")) {
    const Tag t = run.at(0).get<std::string>() == "zero" ? Tag::zero : Tag::plus;
    const int count = run.at(1).get<int>();
    g.tag.insert(g.tag.end(), count, t);
  }
  if (static_cast<int>(g.tag.size()) != g.total_nodes())
    fail(errc::schema_mismatch, "tag run length does not match node count");

  if (w != nullptr && j.contains("weight")) {
    const auto& jw = j.at("weight");
    w->profile = jw.at("profile").get<std::string>() == "indicator"
                     ? WeightField::Profile::indicator
                     : WeightField::Profile::mollified_bump;
    w->amplitude = jw.at("amplitude").get<double>();
    w->values = jw.at("values").get<std::vector<double>>();
  }
  return g;
}

}  // namespace coopvar
