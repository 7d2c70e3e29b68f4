#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gctree/diagnostics.hpp"
#include "gctree/error.hpp"

using namespace gct;

namespace {

RationalMap square() { return RationalMap::polynomial({0.0, 0.0, 1.0}); }

std::vector<Polyline> square_base() {
  const double r1 = std::sqrt(0.5);
  std::vector<SpherePoint> seg, arc;
  for (int i = 0; i <= 64; ++i) {
    const double t = i / 64.0;
    seg.emplace_back(0.5 + (r1 - 0.5) * t);
    arc.emplace_back(std::polar(0.5 + (r1 - 0.5) * t, std::numbers::pi * t));
  }
  arc.front() = 0.5;
  return {Polyline(seg), Polyline(arc)};
}

}  // namespace

TEST_CASE("sampler weights and cylinder ratios") {
  CHECK_THROWS_AS(BernoulliSampler({0.5, 0.4}, 1), Error);
  CHECK_THROWS_AS(BernoulliSampler({1.0, 0.0}, 1), Error);
  BernoulliSampler s({0.2, 0.3, 0.5}, 42);
  const std::vector<Symbol> w{1, 3, 2, 2, 3};
  CHECK(s.cylinder_measure(w) == doctest::Approx(0.2 * 0.5 * 0.3 * 0.3 * 0.5));
  CHECK(s.cylinder_ratio(w, 1, 4) == doctest::Approx(0.3 * 0.3 * 0.5));
  CHECK(s.cylinder_ratio(w, 1, 4) < std::exp(-3 * s.theta()) + 1e-15);
  CHECK(s.theta() == doctest::Approx(-std::log(0.5)));
  // Symbol frequencies within 4 binomial standard errors.
  const int n = 100000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[s.draw() - 1];
  for (int k = 0; k < 3; ++k) {
    const double p = s.weights()[static_cast<std::size_t>(k)];
    CHECK(std::abs(counts[k] - n * p) < 4 * std::sqrt(n * p * (1 - p)));
  }
  BernoulliSampler a({0.5, 0.5}, 9), b({0.5, 0.5}, 9);
  CHECK(a.draw_word(50) == b.draw_word(50));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
}

TEST_CASE("condition (i) for z^2") {
  const auto good = check_condition_i(square(), square_base(), 32, 1e-3);
  CHECK(good.pass);
  CHECK(good.min_distance == doctest::Approx(chordal_distance(0.0, 0.5)).epsilon(1e-9));
  std::vector<SpherePoint> through{0.5, 0.0, -0.5};
  const auto bad = check_condition_i(square(), {Polyline::densified(through, 0.01)}, 32, 1e-3);
  CHECK_FALSE(bad.pass);
  CHECK(bad.min_distance < 1e-15);
}

TEST_CASE("spherical area samples") {
  // n = 0 reproduces the cap area.
  const Region cap = Region::disc(cplx(0.5, 0.0), 0.1);
  const auto e0 = estimate_preimage_volume(square(), cap, 0, 100000, 5);
  CHECK(std::abs(e0.epsilon_hat - cap.exact_area()) < 3 * e0.stderr_ + 1e-4);
  // The whole sphere.
  const Region all = Region::disc(0.0, 2.0);
  for (const auto& e : estimate_volume_series(square(), all, 4, 2000, 1)) CHECK(e.epsilon_hat == doctest::Approx(kSphereArea));
  // Hemisphere |z| < 1 has area 2 pi.
  std::mt19937_64 rng(3);
  int inside = 0;
  for (int i = 0; i < 100000; ++i) inside += sample_sphere(rng).norm2() < 1.0;
  CHECK(std::abs(inside / 100000.0 - 0.5) < 4 * std::sqrt(0.25 / 100000));
  std::ostringstream csv;
  write_volume_csv(csv, {e0});
  CHECK(csv.str().rfind("region,n,epsilon_hat,stderr,samples\n0,0,", 0) == 0);
}

TEST_CASE("lyapunov exponents") {
  std::vector<SpherePoint> circle;
  for (int k = 0; k < 200; ++k) circle.emplace_back(std::polar(1.0, 0.1 + 0.031 * k));
  CHECK(std::abs(lyapunov_estimate(square(), circle, 0, 30) - std::log(2.0)) < 1e-6);
  // Attracting fixed point of z^2 - 1 + ... : z^2/2 has attracting fixed point 0? use z^2 + 0.1z, fixed at 0 mult 0.1.
  const auto g = RationalMap::polynomial({0.0, 0.1, 1.0});
  CHECK(lyapunov_estimate(g, {SpherePoint(0.0)}, 0, 10) == doctest::Approx(std::log(0.1)));
  CHECK_THROWS_AS(lyapunov_estimate(square(), {SpherePoint(0.0)}, 0, 5), Error);
}

TEST_CASE("tail fraction trend for z^2") {
  CodingTree tree(square(), 0.5, square_base());
  BernoulliSampler s = BernoulliSampler::uniform(2, 17);
  const double f5 = tail_fraction(tree, s, 5, 0.1, 200);
  const double f10 = tail_fraction(tree, s, 10, 0.1, 200);
  const double f20 = tail_fraction(tree, s, 20, 0.1, 200);
  CHECK(f5 <= f10);
  CHECK(f10 <= f20);
  CHECK(f20 >= 0.95);
  CHECK(tail_fraction(tree, s, 3, 40.0, 50) == 1.0);
}

TEST_CASE("support density for z^2") {
  CodingTree tree(square(), 0.5, square_base());
  BernoulliSampler s = BernoulliSampler::uniform(2, 5);
  std::vector<SpherePoint> circle;
  for (int k = 0; k < 400; ++k) circle.emplace_back(std::polar(1.0, 2 * std::numbers::pi * k / 400));
  const auto rep = support_density_check(tree, s, circle, 1000, 0.05);
  CHECK(rep.fraction_covered >= 0.99);
  CHECK(support_density_check(tree, s, circle, 1, 2.0).fraction_covered == 1.0);
  // One sample covers about an eps-arc: 2 * 0.05 / (2 pi) of the circle.
  const auto one = support_density_check(tree, s, circle, 1, 0.05);
  CHECK(one.fraction_covered == doctest::Approx(0.1 / (2 * std::numbers::pi)).epsilon(0.3));
}
