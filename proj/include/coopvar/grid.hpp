#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace coopvar {

enum class Tag : std::uint8_t { plus = 0, zero = 1 };
enum class Region { full, zero_only };

/// Description of the zero set of the weight. `interval` is the 1-D
/// configuration (zero set strictly inside (a,b)); `disk_shell` is the
/// canonical 2-D one (positive set = open annulus r_inner < |x-c| < r_outer,
/// strictly interior); `rect` tags the inside of a rectangle as zero, which
/// realizes the alternative reading where the positive set reaches the outer
/// boundary.
struct Omega0Spec {
  enum class Kind { interval, disk_shell, rect };
  Kind kind = Kind::interval;
  double a = 0.0, b = 0.0;                  // interval
  std::array<double, 2> center{0.5, 0.5};   // disk_shell
  double r_inner = 0.0, r_outer = 0.0;      // disk_shell
  std::array<double, 2> rect_lo{0, 0}, rect_hi{0, 0};  // rect
};

struct Grid {
  int dimension = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> n{0, 1};    // interior nodes per axis; n[1] == 1 in 1-D
  std::array<double, 2> h{0.0, 0.0};
  std::vector<Tag> tag;          // one per interior node
  Omega0Spec omega0;

  int total_nodes() const { return n[0] * n[1]; }
  int index(int i, int j = 0) const { return j * n[0] + i; }
  std::array<double, 2> coord(int idx) const {
    const int i = idx % n[0];
    const int j = idx / n[0];
    return {lo[0] + h[0] * (i + 1), dimension == 2 ? lo[1] + h[1] * (j + 1) : 0.0};
  }
  double cell_measure() const { return dimension == 2 ? h[0] * h[1] : h[0]; }
  int count(Tag t) const;

  /// Grid indices belonging to a region, in grid-index order.
  std::vector<int> region_nodes(Region r) const;
  /// Connected components (4-neighbor adjacency restricted to the tag).
  std::vector<std::vector<int>> components(Tag t) const;
  /// Signed distance to the tag interface of omega0, positive on the PLUS side.
  double signed_distance(int idx) const;
  /// Distance from a node to the outer boundary of the domain.
  double boundary_distance(int idx) const;
};

struct WeightField {
  enum class Profile { indicator, mollified_bump };
  Profile profile = Profile::mollified_bump;
  double amplitude = 1.0;
  std::vector<double> values;  // one per interior node
};

/// Power nonlinearity f(x,u) = u^p with p >= 1; F(x,u) = a(x) |u|^{p+2}/(p+2).
struct NonlinearitySpec {
  double p = 1.0;
};

Grid build_grid(int dimension, const std::array<double, 2>& lo, const std::array<double, 2>& hi,
                const std::array<int, 2>& n, const Omega0Spec& omega0);
WeightField build_weight(const Grid& grid, WeightField::Profile profile, double amplitude);

nlohmann::json grid_to_json(const Grid& g, const WeightField* w = nullptr);
Grid grid_from_json(const nlohmann::json& j, WeightField* w = nullptr);

}  // namespace coopvar
