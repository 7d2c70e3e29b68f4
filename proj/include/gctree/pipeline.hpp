#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gctree/census.hpp"
#include "gctree/config.hpp"
#include "gctree/periodics.hpp"

namespace gct {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Stage { Census, Raster, Diagnostics, Tree, Harvest, Density, Overlay };

inline constexpr Stage kAllStages[] = {Stage::Census,  Stage::Raster,  Stage::Diagnostics, Stage::Tree,
                                       Stage::Harvest, Stage::Density, Stage::Overlay};

std::string_view stage_name(Stage s);

// Exit codes: 0 success, 2 invalid config, 10 + stage index on a stage error,
// 30 + stage index on a stage timeout, 3 for a failed manifest check.
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitManifestMismatch = 3;
int stage_exit_code(Stage s);
int stage_timeout_code(Stage s);

struct StageRecord {
  std::string name;
  /// "ok", "failed", "timeout" or "skipped".
  std::string status;
  double seconds = 0.0;
  std::string message;
  std::vector<std::pair<std::string, std::string>> summary;
};

struct FileRecord {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string config_sha256;
  std::vector<std::pair<std::string, std::string>> versions;
  std::vector<StageRecord> stages;
  std::vector<FileRecord> files;
  int exit_code = 0;
};

struct PipelineOptions {
  /// Stages to run, in pipeline order whatever order they are listed in.
  std::vector<Stage> stages{std::begin(kAllStages), std::end(kAllStages)};
  /// Seconds per stage, 0 for no limit. A stage that runs over ends the
  /// process with stage_timeout_code after writing the manifest.
  double stage_timeout = 0.0;
  bool quiet = true;
};

/// Validates the config (InvalidConfig, nothing written), then runs the
/// requested stages writing into config.output. A stage error stops the run
/// and is reported in the manifest; manifest.json is always written.
RunManifest run_pipeline(const RunConfig& config, const PipelineOptions& opts = {});

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

std::string manifest_json(const RunManifest& m);
RunManifest read_manifest(const std::string& path);
/// Files listed in the manifest that are missing or whose hash differs.
std::vector<std::string> verify_manifest(const std::string& dir);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;

  void write_ppm(std::ostream& out) const;
  const unsigned char* pixel(int x, int y) const { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
};

struct OverlayOptions {
  int scale = 1;
};

/// Basin colors, black boundary cells, tree edges in grey, access curves in
/// blue and periodic points as red squares. Throws MismatchedMap when the
/// records were computed for a different map than the raster.
Image render_overlay(const BasinRaster& raster, const std::vector<Polyline>& tree_edges,
                     const std::vector<PeriodicAccessRecord>& records, std::uint64_t records_map_fingerprint,
                     const OverlayOptions& opts = {});

/// Pixel holding z at the given scale, if inside the image.
std::optional<std::pair<int, int>> overlay_pixel(const BasinRaster& raster, cplx z, int scale);

}  // namespace gct
