#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gctree/polyline.hpp"
#include "gctree/rational_map.hpp"

namespace gct {

struct Preimage {
  SpherePoint point;
  int multiplicity = 1;
};

/// The fiber f^{-1}(z). Roots closer than 1e-8 chordal are merged and counted.
struct Fiber {
  std::vector<Preimage> preimages;

  bool degenerate() const;
  /// All d points, repeated by multiplicity.
  std::vector<SpherePoint> points() const;
};

/// Solutions of f(w) = z via the roots of P(w) - z Q(w) (or Q(w) at z = inf),
/// plus infinity when that polynomial drops degree.
Fiber preimages(const RationalMap& map, const SpherePoint& z);

/// Same roots without merging; always `degree` entries.
std::vector<SpherePoint> raw_preimages(const RationalMap& map, const SpherePoint& z);

struct LiftOptions {
  double safety_ratio = 3.0;
  int max_bisections = 20;
  double max_step = 1e-2;
  double start_tolerance = 1e-8;
};

/// Lift of `curve` through f starting at `start` (f(start) = curve.front()).
/// Each point takes the preimage nearest to the previous lifted point; steps
/// where that preimage is not `safety_ratio` times closer than every other one,
/// or where the lifted step exceeds max_step, are bisected on the source curve.
/// Inserted source points lie on the chart-linear source segments, so every
/// lifted point maps onto the source polyline.
Polyline lift_curve(const RationalMap& map, const Polyline& curve, const SpherePoint& start,
                    const LiftOptions& opts = {});

/// The branch F_N of f^{-N} fixed by F_N(anchor) = anchor_image, continued
/// along chart-linear segments out of the anchor.
class InverseBranch {
 public:
  InverseBranch(RationalMap map, int depth, SpherePoint anchor, SpherePoint anchor_image,
                LiftOptions opts = {});

  int depth() const { return depth_; }
  const SpherePoint& anchor() const { return anchor_; }
  const SpherePoint& anchor_image() const { return chain_.front(); }
  const RationalMap& map() const { return map_; }

  SpherePoint operator()(const SpherePoint& target) const;
  /// Image of a curve whose first point lies in the branch's domain.
  Polyline apply(const Polyline& curve) const;

  /// F_N'(x) given y = F_N(x): 1 / prod f'(f^i(y)).
  cplx derivative_at_image(const SpherePoint& y) const;
  /// Chordal-metric derivative of F_N at x given y = F_N(x).
  double spherical_derivative(const SpherePoint& x, const SpherePoint& y) const;

 private:
  // Level starts for a path beginning at `from`: entry j is the start at
  // level j+1 (after j+1 inverse steps); the last entry is F_N(from).
  std::vector<SpherePoint> level_ends(const SpherePoint& from) const;
  Polyline lift_levels(const Polyline& path, const std::vector<SpherePoint>& starts) const;

  RationalMap map_;
  int depth_;
  SpherePoint anchor_;
  // chain_[i] = f^i(anchor_image), i = 0..depth-1.
  std::vector<SpherePoint> chain_;
  LiftOptions opts_;
};

/// Same as InverseBranch{...}(target), for a single evaluation.
SpherePoint inverse_branch_point(const RationalMap& map, int depth, const SpherePoint& anchor,
                                 const SpherePoint& anchor_image, const SpherePoint& target);

struct ContractionCertificate {
  SpherePoint center;
  double radius = 0.0;
  int depth = 0;
  std::vector<SpherePoint> samples;        // boundary samples, then the center
  std::vector<SpherePoint> image_samples;  // F_N of each sample
  double lambda_est = 0.0;
  double distortion_est = 1.0;
  double margin = 0.0;  // radius minus the largest image distance from center
};

struct CertifyOptions {
  int samples = 32;
  double distortion_safety = 1.5;
  double margin_floor = 0.1;
};

/// Evidence that the branch maps B(anchor, radius) into B(anchor, radius(1 - margin_floor))
/// with chordal derivative bound lambda_est < 1/distortion_safety. Throws
/// NotContracting naming the worst sample, or when `postcritical` meets the ball.
ContractionCertificate certify_contraction(const InverseBranch& branch, double radius,
                                           const CertifyOptions& opts = {},
                                           std::span<const SpherePoint> postcritical = {});

}  // namespace gct
