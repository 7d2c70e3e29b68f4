#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gctree/error.hpp"
#include "gctree/lifting.hpp"

using namespace gct;

namespace {

RationalMap square() { return RationalMap::polynomial({0.0, 0.0, 1.0}); }

Polyline arc(double r0, double r1, double th0, double th1, int n = 200) {
  std::vector<SpherePoint> pts;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    pts.emplace_back(std::polar(r0 + (r1 - r0) * t, th0 + (th1 - th0) * t));
  }
  return Polyline(std::move(pts));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("fibers of z^2 - 1") {
  const auto f = RationalMap::polynomial({-1.0, 0.0, 1.0});
  const Fiber fib = preimages(f, 3.0);
  REQUIRE(fib.preimages.size() == 2);
  CHECK_FALSE(fib.degenerate());
  for (const auto& p : fib.preimages) CHECK(std::abs(std::abs(p.point.value()) - 2.0) < 1e-12);
  const Fiber crit = preimages(f, -1.0);
  REQUIRE(crit.preimages.size() == 1);
  CHECK(crit.preimages[0].multiplicity == 2);
  CHECK(crit.degenerate());
  const Fiber at_inf = preimages(f, SpherePoint::infinity());
  REQUIRE(at_inf.preimages.size() == 1);
  CHECK(at_inf.preimages[0].point.is_infinite());
  CHECK(at_inf.points().size() == 2);
}

TEST_CASE("lift of a circle arc under z^2 halves the angle") {
  const auto curve = arc(1.0, 1.0, 0.0, std::numbers::pi);
  const Polyline lifted = lift_curve(square(), curve, 1.0);
  CHECK(chordal_distance(lifted.front(), 1.0) == 0.0);
  CHECK(chordal_distance(lifted.back(), cplx(0.0, 1.0)) < 1e-12);
  CHECK(lifted.max_step() <= 1e-2 + 1e-12);
  for (const auto& p : lifted.points()) {
    CHECK(distance_to_polyline(square()(p), curve) < 1e-12);
    CHECK(std::abs(std::abs(p.value()) - 1.0) < 1e-12);
  }
  // The other branch.
  const Polyline other = lift_curve(square(), curve, -1.0);
  CHECK(chordal_distance(other.back(), cplx(0.0, -1.0)) < 1e-12);
}

TEST_CASE("lift failures carry their kind") {
  const auto curve = arc(1.0, 1.0, 0.0, 1.0);
  CHECK(kind_of([&] { (void)lift_curve(square(), curve, 2.0); }) == ErrorKind::StartMismatch);
  const Polyline from_zero = Polyline::densified(std::vector<SpherePoint>{0.0, 0.5}, 0.01);
  CHECK(kind_of([&] { (void)lift_curve(square(), from_zero, 0.0); }) == ErrorKind::DegenerateFiber);
  const Polyline through_zero = Polyline::densified(std::vector<SpherePoint>{1.0, -1.0}, 0.01);
  CHECK(kind_of([&] { (void)lift_curve(square(), through_zero, 1.0); }) == ErrorKind::BranchAmbiguity);
}

TEST_CASE("inverse branch of z^2 at the fixed point 1") {
  const InverseBranch F(square(), 4, 1.0, 1.0);
  const SpherePoint x = cplx(1.1, 0.05);
  const SpherePoint y = F(x);
  // Re-expansion.
  CHECK(chordal_distance(iterate_point(square(), y, 4), x) < 1e-12);
  CHECK(chordal_distance(y, std::pow(cplx(1.1, 0.05), 1.0 / 16.0)) < 1e-12);
  CHECK(F.spherical_derivative(1.0, 1.0) == doctest::Approx(0.0625));

  const auto crit = critical_points(square(), 16).postcritical_closure();
  const auto cert = certify_contraction(F, 0.3, {}, crit);
  CHECK(cert.lambda_est == doctest::Approx(0.0625).epsilon(0.2));
  CHECK(cert.lambda_est * 1.5 < 1.0);
  CHECK(cert.margin > 0.0);
  CHECK(cert.samples.size() == 33);
  for (std::size_t i = 0; i < cert.samples.size(); ++i) {
    CHECK(chordal_distance(iterate_point(square(), cert.image_samples[i], 4), cert.samples[i]) < 1e-10);
  }
}

TEST_CASE("certificate refuses balls around postcritical points") {
  const InverseBranch F(square(), 1, 1.0, 1.0);
  const auto crit = critical_points(square(), 16).postcritical_closure();
  CHECK(kind_of([&] { (void)certify_contraction(F, 1.5, {}, crit); }) == ErrorKind::NotContracting);
}

TEST_CASE("inverse branch needs a genuine return") {
  CHECK(kind_of([] { InverseBranch(square(), 2, 1.0, 2.0); }) == ErrorKind::StartMismatch);
}
