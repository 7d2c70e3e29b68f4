#pragma once

#include <complex>
#include <limits>

namespace gct {

using cplx = std::complex<double>;

/// A point of the Riemann sphere: a finite complex value or the point at infinity.
class SpherePoint {
 public:
  constexpr SpherePoint() = default;
  SpherePoint(cplx z);  // NOLINT: implicit, finite points are the common case
  SpherePoint(double re, double im = 0.0) : SpherePoint(cplx(re, im)) {}

  static SpherePoint infinity() {
    SpherePoint p;
    p.z_ = cplx(std::numeric_limits<double>::infinity(), 0.0);
    return p;
  }

  bool is_infinite() const { return std::isinf(z_.real()); }
  bool is_finite() const { return !is_infinite(); }

  // Throws ChartRequired at infinity.
  cplx value() const;
  // Coordinate in the 1/z chart; 0 at infinity.
  cplx inverted() const;
  // Squared modulus, +inf at infinity.
  double norm2() const { return is_infinite() ? std::numeric_limits<double>::infinity() : std::norm(z_); }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    return a.is_infinite() == b.is_infinite() && (a.is_infinite() || a.z_ == b.z_);
  }

 private:
  cplx z_{0.0, 0.0};
};

/// Chordal distance 2|a-b| / sqrt((1+|a|^2)(1+|b|^2)); the sphere has diameter 2.
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

/// Point a fraction t of the way from a to b, interpolated in whichever chart
/// (z or 1/z) keeps both endpoints bounded.
SpherePoint interpolate(const SpherePoint& a, const SpherePoint& b, double t);

/// Conformal factor 2/(1+|z|^2) of the chordal metric (zero at infinity).
inline double chordal_scale(const SpherePoint& z) {
  return z.is_infinite() ? 0.0 : 2.0 / (1.0 + z.norm2());
}

/// Point on the ray from center in direction `dir` at chordal distance `radius`.
/// Uses the first crossing; requires radius < chordal_distance(center, infinity).
SpherePoint chordal_ray_point(const SpherePoint& center, cplx dir, double radius);

}  // namespace gct
