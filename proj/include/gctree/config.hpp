#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gctree/census.hpp"
#include "gctree/polynomial.hpp"

namespace gct {

struct MapConfig {
  Poly numerator;
  Poly denominator{1.0};
  /// The tree is built for f^iterate.
  int iterate = 1;
};

struct BasinConfig {
  int period = 1;
  /// The cycle with a point closest to this one is used.
  cplx near{0.0, 0.0};
};

struct TreeConfig {
  cplx root{0.0, 0.0};
  std::vector<std::vector<cplx>> base_curves;
  int depth = 8;
  /// "full" or "prefixes".
  std::string mode = "full";
  std::vector<std::string> prefixes;
  double max_step = 1e-2;
  int postcritical_K = 64;
  double postcritical_margin = 1e-6;
};

struct HarvestConfig {
  int trials = 200;
  int M_min = 3;
  int N_max = 12;
  std::vector<double> radii{0.3, 0.15, 0.075};
  double tail_tol = 1e-6;
  int anchor_retries = 5;
  bool rotations = true;
};

struct RasterConfig {
  RasterBounds bounds{};
  int nx = 512;
  int ny = 512;
  int max_iters = 500;
};

struct RegionConfig {
  cplx center{0.0, 0.0};
  double radius = 0.1;
};

struct DiagnosticsConfig {
  std::vector<RegionConfig> regions;
  int volume_n_max = 12;
  int volume_samples = 100000;
};

struct OverlayConfig {
  int scale = 1;
  /// Tree edges up to this depth are drawn.
  int tree_depth = 6;
};

struct RunConfig {
  std::string name = "run";
  MapConfig map;
  BasinConfig basin;
  TreeConfig tree;
  std::vector<double> weights;
  HarvestConfig harvest;
  RasterConfig raster;
  int census_max_period = 6;
  DiagnosticsConfig diagnostics;
  OverlayConfig overlay;
  std::uint64_t seed = 1;
  std::string output = "out";
};

/// Numbers may be given as JSON numbers or decimal strings, complex values as
/// [re, im]. Missing keys take the defaults above. Throws InvalidConfig.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// All problems found, empty when the config is usable.
std::vector<std::string> config_problems(const RunConfig& config);
/// Throws InvalidConfig listing every problem.
void validate_config(const RunConfig& config);

}  // namespace gct
