#pragma once

#include <span>
#include <vector>

#include "gctree/sphere.hpp"

namespace gct {

/// Ordered points on the sphere with their chordal length.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<SpherePoint> points);

  /// Through `vertices`, with extra points so no chordal step exceeds max_step.
  static Polyline densified(std::span<const SpherePoint> vertices, double max_step);

  /// Subset of the points (ends kept) with consecutive chordal steps at most
  /// max_step, provided the original steps were.
  Polyline decimated(double max_step) const;

  const std::vector<SpherePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const SpherePoint& front() const { return points_.front(); }
  const SpherePoint& back() const { return points_.back(); }
  const SpherePoint& operator[](std::size_t i) const { return points_[i]; }

  /// Sum of chordal segment lengths.
  double length() const { return length_; }
  double max_step() const;

  /// Appends `other`, dropping its first point when it repeats our last one.
  void append(const Polyline& other);

 private:
  std::vector<SpherePoint> points_;
  double length_ = 0.0;
};

/// Chordal distance from z to the polyline (segments interpolated in the finite chart).
double distance_to_polyline(const SpherePoint& z, const Polyline& curve);

}  // namespace gct
