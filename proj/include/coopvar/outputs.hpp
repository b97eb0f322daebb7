#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace coopvar {

/// %.17g, locale-independent; the fixed float format for CSV cells.
std::string fmt17(double v);

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

/// Write-to-temp-then-rename so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Bifurcation diagram: sup_u against gamma with vertical markers at the
/// interval endpoints. Throws SCHEMA_MISMATCH unless the CSV carries the
/// branch schema. Byte-deterministic for fixed inputs.
std::string render_bifurcation_svg(const std::string& branch_csv, double gamma_lo,
                                   double gamma_hi);

/// Collects task outputs, writes them atomically, and emits a manifest with
/// content hashes at the end.
class OutputSink {
public:
  OutputSink(std::filesystem::path dir, nlohmann::json effective_config);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);

  /// Writes manifest.json; wall_time_s is measured by the caller.
  void finish(const std::string& task, double wall_time_s, const std::string& grid_hash,
              const std::string& error = "");

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
  nlohmann::json config_;
  std::vector<std::string> files_;
  nlohmann::json entries_ = nlohmann::json::array();
};

}  // namespace coopvar
