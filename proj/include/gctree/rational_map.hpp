#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gctree/polynomial.hpp"
#include "gctree/sphere.hpp"

namespace gct {

/// Rational map P/Q of the Riemann sphere, coefficients in ascending order.
class RationalMap {
 public:
  RationalMap(Poly numerator, Poly denominator);
  static RationalMap polynomial(Poly coeffs) { return RationalMap(std::move(coeffs), Poly{1.0}); }

  int degree() const { return degree_; }
  const Poly& numerator() const { return num_; }
  const Poly& denominator() const { return den_; }
  bool is_polynomial() const { return num_deg_ >= 2 && den_deg_ == 0; }

  SpherePoint operator()(const SpherePoint& z) const;
  /// f'(z) by the quotient rule. Throws ChartRequired at infinity or at a pole.
  cplx derivative(const SpherePoint& z) const;
  /// |f'(z)| (1+|z|^2) / (1+|f(z)|^2), the derivative in the chordal metric.
  double spherical_derivative(const SpherePoint& z) const;

  /// Composition f∘...∘f (m times) as a rational map with expanded coefficients.
  RationalMap iterate(int m) const;
  /// f∘g.
  RationalMap compose(const RationalMap& g) const;

  /// Stable 64-bit hash of the coefficients.
  std::uint64_t fingerprint() const;
  std::string to_string() const;

 private:
  Poly num_;
  Poly den_;
  int num_deg_ = 0;
  int den_deg_ = 0;
  int degree_ = 0;
};

SpherePoint eval_map(const RationalMap& map, const SpherePoint& z);
cplx eval_derivative(const RationalMap& map, const SpherePoint& z);

/// f^n(z) by repeated evaluation.
SpherePoint iterate_point(const RationalMap& map, SpherePoint z, int n);

/// Multiplier prod f'(z_i) of a cycle. Cycles through infinity or poles are
/// handled by conjugating to the 1/z chart at those points.
cplx cycle_multiplier(const RationalMap& map, std::span<const SpherePoint> cycle);

struct CriticalData {
  std::vector<SpherePoint> points;
  std::vector<int> multiplicity;
  /// orbits[i] = {c_i, f(c_i), ...}, at most K entries; cut short once the orbit
  /// repeats a point (superattracting cycles).
  std::vector<std::vector<SpherePoint>> orbits;
  /// Attracting or parabolic cycles that the truncated orbits accumulate on.
  /// Together with the orbits this is the closure of the postcritical set.
  std::vector<std::vector<SpherePoint>> limit_cycles;

  std::vector<SpherePoint> postcritical_closure() const;
};

CriticalData critical_points(const RationalMap& map, int K);

}  // namespace gct
