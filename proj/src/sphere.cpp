#include "gctree/sphere.hpp"

#include <cmath>

#include "gctree/error.hpp"

namespace gct {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ChartRequired: return "ChartRequired";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateFiber: return "DegenerateFiber";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::StartMismatch: return "StartMismatch";
    case ErrorKind::NotContracting: return "NotContracting";
    case ErrorKind::PostcriticalViolation: return "PostcriticalViolation";
    case ErrorKind::DepthUnavailable: return "DepthUnavailable";
    case ErrorKind::SlowConvergence: return "SlowConvergence";
    case ErrorKind::DegreeOverflow: return "DegreeOverflow";
    case ErrorKind::TrapConstructionFailed: return "TrapConstructionFailed";
    case ErrorKind::EmptyBoundary: return "EmptyBoundary";
    case ErrorKind::NoRecurrence: return "NoRecurrence";
    case ErrorKind::NewtonEscapedBall: return "NewtonEscapedBall";
    case ErrorKind::TailBudgetExceeded: return "TailBudgetExceeded";
    case ErrorKind::OrbitEscapedDomain: return "OrbitEscapedDomain";
    case ErrorKind::EmptyHarvest: return "EmptyHarvest";
    case ErrorKind::MismatchedMap: return "MismatchedMap";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

SpherePoint::SpherePoint(cplx z) : z_(z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    if (std::isnan(z.real()) || std::isnan(z.imag())) {
      throw Error(ErrorKind::InvalidArgument, "NaN coordinate for a sphere point");
    }
    z_ = cplx(std::numeric_limits<double>::infinity(), 0.0);
  }
}

cplx SpherePoint::value() const {
  if (is_infinite()) throw Error(ErrorKind::ChartRequired, "point at infinity has no finite coordinate");
  return z_;
}

cplx SpherePoint::inverted() const {
  if (is_infinite()) return 0.0;
  if (z_ == cplx(0.0)) return cplx(std::numeric_limits<double>::infinity(), 0.0);
  return 1.0 / z_;
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite()) return 2.0 / std::sqrt(1.0 + b.norm2());
  if (b.is_infinite()) return 2.0 / std::sqrt(1.0 + a.norm2());
  const cplx za = a.value();
  const cplx zb = b.value();
  // Far from the origin the 1/z chart keeps the difference well conditioned.
  if (std::norm(za) > 1.0 && std::norm(zb) > 1.0) {
    const cplx wa = 1.0 / za;
    const cplx wb = 1.0 / zb;
    return 2.0 * std::abs(wa - wb) / std::sqrt((1.0 + std::norm(wa)) * (1.0 + std::norm(wb)));
  }
  // One point outside the unit disc: divide through by it so nothing overflows.
  if (std::norm(za) > 1.0 || std::norm(zb) > 1.0) {
    const cplx big = std::norm(za) > 1.0 ? za : zb;
    const cplx small = std::norm(za) > 1.0 ? zb : za;
    const cplx w = 1.0 / big;
    return 2.0 * std::abs(1.0 - small * w) / std::sqrt((1.0 + std::norm(w)) * (1.0 + std::norm(small)));
  }
  return 2.0 * std::abs(za - zb) / std::sqrt((1.0 + std::norm(za)) * (1.0 + std::norm(zb)));
}

SpherePoint interpolate(const SpherePoint& a, const SpherePoint& b, double t) {
  const bool finite_chart = a.is_finite() && b.is_finite() && a.norm2() <= 4.0 && b.norm2() <= 4.0;
  if (finite_chart) return SpherePoint(a.value() + t * (b.value() - a.value()));
  const bool inverse_chart = a.norm2() >= 0.25 && b.norm2() >= 0.25;
  if (inverse_chart) {
    const cplx w = a.inverted() + t * (b.inverted() - a.inverted());
    if (w == cplx(0.0)) return SpherePoint::infinity();
    return SpherePoint(1.0 / w);
  }
  // Endpoints on opposite sides of the unit circle with one of them extreme:
  // go through the finite chart when possible.
  if (a.is_finite() && b.is_finite()) return SpherePoint(a.value() + t * (b.value() - a.value()));
  return t < 0.5 ? a : b;
}

SpherePoint chordal_ray_point(const SpherePoint& center, cplx dir, double radius) {
  const cplx c = center.value();
  const cplx u = dir / std::abs(dir);
  // Chordal distance along the ray rises to a maximum and then falls back
  // toward chordal(center, inf); bracket the first crossing.
  double hi = radius * (1.0 + std::norm(c));
  while (chordal_distance(center, SpherePoint(c + hi * u)) < radius) {
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorKind::InvalidArgument, "chordal radius exceeds the reachable distance");
  }
  double lo = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chordal_distance(center, SpherePoint(c + mid * u)) < radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return SpherePoint(c + 0.5 * (lo + hi) * u);
}

}  // namespace gct
