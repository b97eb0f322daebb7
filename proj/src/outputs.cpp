#include "coopvar/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "coopvar/errors.hpp"

namespace coopvar {

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_error, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.good()) fail(errc::io_error, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_bifurcation_svg(const std::string& branch_csv, double gamma_lo,
                                   double gamma_hi) {
  std::istringstream in(branch_csv);
  std::string header;
  if (!std::getline(in, header) ||
      header != "gamma,sup_u,sup_v,energy,min_u_core,mass_frac_plus")
    fail(errc::schema_mismatch, "branch CSV schema expected, got: " + header);

  std::vector<std::pair<double, double>> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double g = 0.0, su = 0.0;
    if (std::sscanf(line.c_str(), "%lg,%lg", &g, &su) != 2)
      fail(errc::schema_mismatch, "unparseable branch CSV row: " + line);
    pts.emplace_back(g, su);
  }

  const double w = 640.0, h = 420.0, ml = 60.0, mr = 20.0, mt = 20.0, mb = 45.0;
  double xmin = gamma_lo, xmax = gamma_hi;
  double ymin = 0.0, ymax = 1.0;
  for (auto [g, su] : pts) ymax = std::max(ymax, su);
  ymax *= 1.05;
  const auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  const auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << fmt_coord(ml) << "\" y1=\"" << fmt_coord(h - mb) << "\" x2=\""
      << fmt_coord(w - mr) << "\" y2=\"" << fmt_coord(h - mb)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt_coord(ml) << "\" y1=\"" << fmt_coord(mt) << "\" x2=\""
      << fmt_coord(ml) << "\" y2=\"" << fmt_coord(h - mb)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << fmt_coord((ml + w - mr) / 2) << "\" y=\"" << fmt_coord(h - 10)
      << "\" font-size=\"13\" text-anchor=\"middle\">gamma</text>\n";
  svg << "<text x=\"15\" y=\"" << fmt_coord((mt + h - mb) / 2)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << fmt_coord((mt + h - mb) / 2) << ")\">sup u</text>\n";
  // interval markers
  for (double g : {gamma_lo, gamma_hi}) {
    svg << "<line x1=\"" << fmt_coord(sx(g)) << "\" y1=\"" << fmt_coord(mt) << "\" x2=\""
        << fmt_coord(sx(g)) << "\" y2=\"" << fmt_coord(h - mb)
        << "\" stroke=\"#b22222\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";
  }
  if (!pts.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) svg << ' ';
      svg << fmt_coord(sx(pts[i].first)) << ',' << fmt_coord(sy(pts[i].second));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

OutputSink::OutputSink(std::filesystem::path dir, nlohmann::json effective_config)
    : dir_(std::move(dir)), config_(std::move(effective_config)) {
  std::filesystem::create_directories(dir_);
}

void OutputSink::write(const std::string& name, const std::string& content) {
  atomic_write(dir_ / name, content);
  files_.push_back(name);
  entries_.push_back({{"file", name},
                      {"bytes", content.size()},
                      {"fnv1a64", fnv1a64_hex(content)}});
}

void OutputSink::write_json(const std::string& name, const nlohmann::json& j) {
  write(name, j.dump(2) + "\n");
}

void OutputSink::finish(const std::string& task, double wall_time_s,
                        const std::string& grid_hash, const std::string& error) {
  nlohmann::json m;
  m["schema_version"] = 1;
  m["task"] = task;
  m["config_hash"] = fnv1a64_hex(config_.dump());
  m["grid_hash"] = grid_hash;
  m["effective_config"] = config_;
  m["versions"] = {{"coopvar", "0.1.0"}, {"compiler", __VERSION__}};
  m["wall_time_s"] = wall_time_s;
  m["outputs"] = entries_;
  if (!error.empty()) m["error"] = error;
  atomic_write(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace coopvar
