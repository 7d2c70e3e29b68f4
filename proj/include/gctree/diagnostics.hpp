#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gctree/coding_tree.hpp"
#include "gctree/sampler.hpp"

namespace gct {

struct ConditionReport {
  double min_distance = 0.0;
  /// Curve index (0-based) and the postcritical point realizing the minimum.
  int worst_curve = -1;
  SpherePoint nearest;
  double margin = 0.0;
  bool pass = false;
  std::size_t postcritical_points = 0;
};

/// Distance from the base curves to the K-truncated postcritical set together
/// with the limit cycles of the critical orbits.
ConditionReport check_condition_i(const RationalMap& map, const std::vector<Polyline>& base_curves, int K,
                                  double margin);

/// Chordal disc, or chordal neighbourhood of a polyline.
struct Region {
  enum class Kind { Disc, Tube };
  Kind kind = Kind::Disc;
  SpherePoint center;
  double radius = 0.1;
  Polyline curve;

  static Region disc(SpherePoint c, double r) { return {Kind::Disc, c, r, {}}; }
  static Region tube(Polyline c, double r) { return {Kind::Tube, {}, r, std::move(c)}; }
  bool contains(const SpherePoint& z) const;
  /// Exact spherical area for discs (pi r^2, capped at 4 pi), negative for tubes.
  double exact_area() const;
};

constexpr double kSphereArea = 12.566370614359172;

struct VolumeDecayEstimate {
  int region_index = 0;
  int n = 0;
  double epsilon_hat = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Uniform point of the sphere (area measure), returned in the plane chart.
SpherePoint sample_sphere(std::mt19937_64& rng);

/// Area of {x : f^n(x) in region} by forward iteration of area samples.
VolumeDecayEstimate estimate_preimage_volume(const RationalMap& map, const Region& region, int n,
                                             std::size_t samples, std::uint64_t seed);
/// Same samples reused for every n in 0..n_max.
std::vector<VolumeDecayEstimate> estimate_volume_series(const RationalMap& map, const Region& region, int n_max,
                                                        std::size_t samples, std::uint64_t seed);

/// Birkhoff average of log of the chordal derivative along each orbit after
/// burn_in steps, averaged over the starting points. For periodic orbits and
/// long averages this equals the average of log|f'|. Throws OrbitEscapedDomain
/// on critical points or non-finite values.
double lyapunov_estimate(const RationalMap& map, const std::vector<SpherePoint>& starts, int burn_in, int length);

struct TailFractionOptions {
  /// Extra symbols drawn past depth n to measure the tail.
  int lookahead = 12;
  double ratio_cap = 0.9;
};

/// Fraction of sampled words with estimated tail length beyond depth n below r.
/// Tails whose last edge ratios all exceed ratio_cap count as failures.
double tail_fraction(CodingTree& tree, BernoulliSampler& sampler, int n, double r, int trials,
                     const TailFractionOptions& opts = {});

struct SupportDensity {
  double fraction_covered = 0.0;
  std::size_t sampled_points = 0;
  std::size_t slow_words = 0;
  double max_gap = 0.0;
};

/// Fraction of boundary points within eps of a sampled coding point.
SupportDensity support_density_check(CodingTree& tree, BernoulliSampler& sampler,
                                     const std::vector<SpherePoint>& boundary, int trials, double eps,
                                     double tol = 1e-6);

void write_volume_csv(std::ostream& out, const std::vector<VolumeDecayEstimate>& series);

}  // namespace gct
