#include "gctree/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gctree/error.hpp"

namespace gct {

bool Fiber::degenerate() const {
  return std::any_of(preimages.begin(), preimages.end(), [](const Preimage& p) { return p.multiplicity > 1; });
}

std::vector<SpherePoint> Fiber::points() const {
  std::vector<SpherePoint> out;
  for (const auto& p : preimages) {
    for (int i = 0; i < p.multiplicity; ++i) out.push_back(p.point);
  }
  return out;
}

std::vector<SpherePoint> raw_preimages(const RationalMap& map, const SpherePoint& z) {
  const Poly& P = map.numerator();
  const Poly& Q = map.denominator();
  const int d = map.degree();
  Poly R(static_cast<std::size_t>(d) + 1, 0.0);
  if (z.is_infinite()) {
    for (std::size_t i = 0; i < Q.size(); ++i) R[i] = Q[i];
  } else {
    const cplx c = z.value();
    for (std::size_t i = 0; i < P.size(); ++i) R[i] += P[i];
    for (std::size_t i = 0; i < Q.size(); ++i) R[i] -= c * Q[i];
  }
  const int deg = poly_degree(R);
  std::vector<SpherePoint> out;
  out.reserve(static_cast<std::size_t>(d));
  if (deg >= 1) {
    for (const cplx& r : poly_roots(R)) out.emplace_back(r);
  }
  while (static_cast<int>(out.size()) < d) out.push_back(SpherePoint::infinity());
  return out;
}

Fiber preimages(const RationalMap& map, const SpherePoint& z) {
  const auto raw = raw_preimages(map, z);
  Fiber fiber;
  std::vector<bool> used(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    int mult = 1;
    cplx sum = raw[i].is_finite() ? raw[i].value() : cplx(0.0);
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (!used[j] && chordal_distance(raw[i], raw[j]) <= 1e-8) {
        used[j] = true;
        ++mult;
        if (raw[j].is_finite()) sum += raw[j].value();
      }
    }
    const SpherePoint p = raw[i].is_finite() ? SpherePoint(sum / static_cast<double>(mult)) : raw[i];
    fiber.preimages.push_back({p, mult});
  }
  for (const auto& p : fiber.preimages) {
    if (chordal_distance(map(p.point), z) > 1e-10) {
      throw Error(ErrorKind::NoConvergence, "preimage residual above 1e-10");
    }
  }
  return fiber;
}

Polyline lift_curve(const RationalMap& map, const Polyline& curve, const SpherePoint& start,
                    const LiftOptions& opts) {
  if (curve.empty()) throw Error(ErrorKind::InvalidArgument, "cannot lift an empty curve");
  if (chordal_distance(map(start), curve.front()) > opts.start_tolerance) {
    throw Error(ErrorKind::StartMismatch, "f(start) does not match the curve's first point");
  }
  {
    const auto fiber = raw_preimages(map, curve.front());
    int close = 0;
    for (const auto& w : fiber) {
      if (chordal_distance(w, start) <= 1e-8) ++close;
    }
    if (close > 1) throw Error(ErrorKind::DegenerateFiber, "lift would start at a multiple preimage");
  }

  struct Piece {
    SpherePoint from;
    SpherePoint to;
    int depth;
  };
  std::vector<SpherePoint> out{start};
  out.reserve(curve.size() + 8);
  SpherePoint prev = start;
  std::vector<Piece> stack;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    stack.push_back({curve[k - 1], curve[k], 0});
    while (!stack.empty()) {
      const Piece piece = stack.back();
      stack.pop_back();
      const auto roots = raw_preimages(map, piece.to);
      double d1 = 1e300, d2 = 1e300;
      std::size_t best = 0;
      for (std::size_t i = 0; i < roots.size(); ++i) {
        const double dist = chordal_distance(roots[i], prev);
        if (dist < d1) {
          d2 = d1;
          d1 = dist;
          best = i;
        } else if (dist < d2) {
          d2 = dist;
        }
      }
      const bool safe = d2 >= opts.safety_ratio * d1;
      const bool short_step = d1 <= opts.max_step;
      if ((safe && short_step) || (safe && piece.depth >= opts.max_bisections)) {
        out.push_back(roots[best]);
        prev = roots[best];
        continue;
      }
      if (piece.depth >= opts.max_bisections) {
        std::ostringstream os;
        os << "no safe preimage after " << opts.max_bisections << " bisections (nearest " << d1
           << ", competitor " << d2 << "); the curve passes too near a critical value";
        throw Error(ErrorKind::BranchAmbiguity, os.str());
      }
      const SpherePoint mid = interpolate(piece.from, piece.to, 0.5);
      stack.push_back({mid, piece.to, piece.depth + 1});
      stack.push_back({piece.from, mid, piece.depth + 1});
    }
  }
  return Polyline(std::move(out));
}

InverseBranch::InverseBranch(RationalMap map, int depth, SpherePoint anchor, SpherePoint anchor_image,
                             LiftOptions opts)
    : map_(std::move(map)), depth_(depth), anchor_(anchor), opts_(opts) {
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "inverse branch depth must be >= 1");
  chain_.push_back(anchor_image);
  for (int i = 1; i < depth; ++i) chain_.push_back(map_(chain_.back()));
  if (chordal_distance(map_(chain_.back()), anchor_) > opts_.start_tolerance) {
    throw Error(ErrorKind::StartMismatch, "f^N(anchor_image) does not return to the anchor");
  }
}

std::vector<SpherePoint> InverseBranch::level_ends(const SpherePoint& from) const {
  std::vector<SpherePoint> ends;
  ends.reserve(static_cast<std::size_t>(depth_));
  if (from == anchor_) {
    for (int j = depth_ - 1; j >= 0; --j) ends.push_back(chain_[static_cast<std::size_t>(j)]);
    return ends;
  }
  const SpherePoint seg[2] = {anchor_, from};
  Polyline path = Polyline::densified(seg, opts_.max_step);
  for (int j = depth_ - 1; j >= 0; --j) {
    path = lift_curve(map_, path, chain_[static_cast<std::size_t>(j)], opts_);
    ends.push_back(path.back());
  }
  return ends;
}

Polyline InverseBranch::lift_levels(const Polyline& path, const std::vector<SpherePoint>& starts) const {
  Polyline current = path;
  for (const auto& s : starts) current = lift_curve(map_, current, s, opts_);
  return current;
}

SpherePoint InverseBranch::operator()(const SpherePoint& target) const { return level_ends(target).back(); }

Polyline InverseBranch::apply(const Polyline& curve) const {
  if (curve.empty()) return curve;
  return lift_levels(curve, level_ends(curve.front()));
}

cplx InverseBranch::derivative_at_image(const SpherePoint& y) const {
  cplx d = 1.0;
  SpherePoint w = y;
  for (int i = 0; i < depth_; ++i) {
    d *= map_.derivative(w);
    w = map_(w);
  }
  return 1.0 / d;
}

double InverseBranch::spherical_derivative(const SpherePoint& x, const SpherePoint& y) const {
  return std::abs(derivative_at_image(y)) * (1.0 + x.norm2()) / (1.0 + y.norm2());
}

SpherePoint inverse_branch_point(const RationalMap& map, int depth, const SpherePoint& anchor,
                                 const SpherePoint& anchor_image, const SpherePoint& target) {
  return InverseBranch(map, depth, anchor, anchor_image)(target);
}

ContractionCertificate certify_contraction(const InverseBranch& branch, double radius, const CertifyOptions& opts,
                                           std::span<const SpherePoint> postcritical) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  if (opts.samples < 3) throw Error(ErrorKind::InvalidArgument, "need at least 3 boundary samples");
  const SpherePoint center = branch.anchor();
  for (const auto& p : postcritical) {
    if (chordal_distance(p, center) <= radius) {
      throw Error(ErrorKind::NotContracting, "ball meets the postcritical set");
    }
  }

  ContractionCertificate cert;
  cert.center = center;
  cert.radius = radius;
  cert.depth = branch.depth();
  for (int k = 0; k < opts.samples; ++k) {
    const cplx dir = std::polar(1.0, 2.0 * std::numbers::pi * k / opts.samples);
    cert.samples.push_back(chordal_ray_point(center, dir, radius));
  }
  cert.samples.push_back(center);

  double lam_max = 0.0;
  double lam_min = 1e300;
  double worst_dist = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < cert.samples.size(); ++i) {
    const SpherePoint y = branch(cert.samples[i]);
    cert.image_samples.push_back(y);
    const double lam = branch.spherical_derivative(cert.samples[i], y);
    lam_max = std::max(lam_max, lam);
    lam_min = std::min(lam_min, lam);
    const double dist = chordal_distance(center, y);
    if (dist > worst_dist) {
      worst_dist = dist;
      worst = i;
    }
  }
  cert.lambda_est = lam_max;
  cert.distortion_est = lam_min > 0.0 ? lam_max / lam_min : 1e300;
  cert.margin = radius - worst_dist;

  const bool inside = worst_dist < radius * (1.0 - opts.margin_floor);
  const bool contracting = cert.lambda_est * opts.distortion_safety < 1.0;
  if (!inside || !contracting) {
    std::ostringstream os;
    os << "certificate failed: lambda_est=" << cert.lambda_est << " worst image distance " << worst_dist
       << " (sample " << worst << ") for radius " << radius;
    throw Error(ErrorKind::NotContracting, os.str());
  }
  return cert;
}

}  // namespace gct
