#include "gctree/polyline.hpp"

#include <algorithm>
#include <cmath>

#include "gctree/error.hpp"

namespace gct {

Polyline::Polyline(std::vector<SpherePoint> points) : points_(std::move(points)) {
  for (std::size_t i = 1; i < points_.size(); ++i) length_ += chordal_distance(points_[i - 1], points_[i]);
}

Polyline Polyline::densified(std::span<const SpherePoint> vertices, double max_step) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidArgument, "polyline needs at least one vertex");
  if (!(max_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "max_step must be positive");
  std::vector<SpherePoint> pts{vertices.front()};
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const SpherePoint& a = vertices[i - 1];
    const SpherePoint& b = vertices[i];
    const double len = chordal_distance(a, b);
    if (len == 0.0) continue;
    // Chordal length along a chart-linear segment can exceed the endpoint
    // distance; refine until each piece is short enough.
    int pieces = std::max(1, static_cast<int>(std::ceil(len / max_step)));
    for (;;) {
      bool ok = true;
      SpherePoint prev = a;
      for (int k = 1; k <= pieces && ok; ++k) {
        const SpherePoint next = interpolate(a, b, static_cast<double>(k) / pieces);
        if (chordal_distance(prev, next) > max_step) ok = false;
        prev = next;
      }
      if (ok) break;
      pieces *= 2;
    }
    for (int k = 1; k < pieces; ++k) pts.push_back(interpolate(a, b, static_cast<double>(k) / pieces));
    pts.push_back(b);
  }
  return Polyline(std::move(pts));
}

Polyline Polyline::decimated(double max_step) const {
  if (points_.size() <= 2) return *this;
  std::vector<SpherePoint> kept{points_.front()};
  for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
    if (chordal_distance(kept.back(), points_[i + 1]) > max_step) kept.push_back(points_[i]);
  }
  kept.push_back(points_.back());
  return Polyline(std::move(kept));
}

double Polyline::max_step() const {
  double m = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, chordal_distance(points_[i - 1], points_[i]));
  return m;
}

void Polyline::append(const Polyline& other) {
  if (other.empty()) return;
  std::size_t first = 0;
  if (!points_.empty() && points_.back() == other.front()) first = 1;
  for (std::size_t i = first; i < other.size(); ++i) {
    if (!points_.empty()) length_ += chordal_distance(points_.back(), other[i]);
    points_.push_back(other[i]);
  }
}

double distance_to_polyline(const SpherePoint& z, const Polyline& curve) {
  double best = 2.0;
  for (std::size_t i = 0; i < curve.size(); ++i) best = std::min(best, chordal_distance(z, curve[i]));
  if (z.is_infinite()) return best;
  const cplx p = z.value();
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const SpherePoint& a = curve[i - 1];
    const SpherePoint& b = curve[i];
    if (a.is_infinite() || b.is_infinite()) continue;
    const cplx ab = b.value() - a.value();
    const double len2 = std::norm(ab);
    if (len2 == 0.0) continue;
    const double t = std::clamp(std::real((p - a.value()) * std::conj(ab)) / len2, 0.0, 1.0);
    best = std::min(best, chordal_distance(z, SpherePoint(a.value() + t * ab)));
  }
  return best;
}

}  // namespace gct
