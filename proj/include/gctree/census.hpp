#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gctree/rational_map.hpp"

namespace gct {

enum class OrbitKind { Attracting, Repelling, Parabolic, Indifferent };

std::string_view to_string(OrbitKind kind);

struct PeriodicOrbitRecord {
  int period = 0;
  std::vector<SpherePoint> points;
  cplx multiplier{0.0, 0.0};
  OrbitKind kind = OrbitKind::Repelling;
};

/// Parabolic when the multiplier is within 1e-8 of a root of unity of order
/// at most 64, indifferent when |m| is within 1e-8 of 1 otherwise.
OrbitKind classify_multiplier(cplx m);

struct CensusOptions {
  double max_degree = 1e4;
  /// Roots closer than this (chordal) are one periodic point.
  double cluster_tolerance = 1e-7;
  int max_iterations = 1500;
};

/// All periodic points of f^n (every period dividing n), with multiplicity
/// removed, sorted. Roots of the numerator of f^n(z) - z found by Aberth
/// iteration on the implicit iterate, then Newton polished.
std::vector<SpherePoint> fixed_points_of_iterate(const RationalMap& map, int n, const CensusOptions& opts = {});

/// Orbits of exact period n, each starting at its sorted-first point, sorted by
/// that point. Throws DegreeOverflow when d^n exceeds opts.max_degree.
std::vector<PeriodicOrbitRecord> find_periodic_orbits(const RationalMap& map, int n, const CensusOptions& opts = {});

/// Orbit of an already located periodic point.
PeriodicOrbitRecord orbit_record(const RationalMap& map, const SpherePoint& point, int period);

struct RasterBounds {
  double xmin = -1.5;
  double xmax = 1.5;
  double ymin = -1.5;
  double ymax = 1.5;
};

/// Immediate basin labels on a grid of cell centers. label = -1 outside the
/// immediate basin, otherwise the index of the cycle point whose Fatou
/// component holds the cell.
struct BasinRaster {
  RasterBounds bounds;
  int nx = 0;
  int ny = 0;
  std::vector<int> labels;
  std::vector<std::size_t> boundary_cells;
  std::uint64_t map_fingerprint = 0;
  /// Trap radius used (chordal).
  double trap_radius = 0.0;

  double cell_width() const { return (bounds.xmax - bounds.xmin) / nx; }
  double cell_height() const { return (bounds.ymax - bounds.ymin) / ny; }
  double cell_size() const { return std::max(cell_width(), cell_height()); }
  /// Row j = 0 is the top (largest imaginary part).
  cplx center(int i, int j) const;
  int label(int i, int j) const { return labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)]; }
  /// Cell containing z, if inside the bounds.
  std::optional<std::size_t> cell_of(cplx z) const;
  cplx center(std::size_t cell) const { return center(static_cast<int>(cell % static_cast<std::size_t>(nx)), static_cast<int>(cell / static_cast<std::size_t>(nx))); }
};

struct RasterOptions {
  int max_iters = 500;
  /// Iterations the parabolic sector test must hold.
  int petal_steps = 50;
  double max_trap_radius = 0.1;
};

/// Attracting cycle (kind Attracting) or parabolic cycle (kind Parabolic).
BasinRaster rasterize_basin(const RationalMap& map, const PeriodicOrbitRecord& cycle, const RasterBounds& bounds,
                            int nx, int ny, const RasterOptions& opts = {});

/// Cells whose 4-neighbourhood (with the cell) shows at least two labels.
std::vector<std::size_t> compute_boundary_cells(int nx, int ny, const std::vector<int>& labels);

/// Centers of the boundary cells. Throws EmptyBoundary.
std::vector<SpherePoint> boundary_point_set(const BasinRaster& raster);

/// Binary PPM (P6): one color per label, white outside, boundary black.
void write_basin_ppm(std::ostream& out, const BasinRaster& raster);
void write_boundary_csv(std::ostream& out, const std::vector<SpherePoint>& points);

/// RGB color used for a label.
void label_color(int label, unsigned char rgb[3]);

}  // namespace gct
