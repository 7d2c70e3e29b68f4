#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gctree/coding_tree.hpp"
#include "gctree/error.hpp"

using namespace gct;

namespace {

constexpr double kPi = std::numbers::pi;

RationalMap square() { return RationalMap::polynomial({0.0, 0.0, 1.0}); }

// Root 1/2, the real segment to 2^{-1/2} and a half turn to -2^{-1/2}.
std::vector<Polyline> square_base() {
  const double r1 = std::sqrt(0.5);
  std::vector<SpherePoint> seg, arc;
  for (int i = 0; i <= 64; ++i) {
    const double t = i / 64.0;
    seg.emplace_back(0.5 + (r1 - 0.5) * t);
    arc.emplace_back(std::polar(0.5 + (r1 - 0.5) * t, kPi * t));
  }
  arc.front() = 0.5;
  return {Polyline(seg), Polyline(arc)};
}

// Closed form for z^2: vertex n of (a_0..a_n) is 2^{-2^{-(n+1)}} exp(i theta)
// with theta = pi * sum (a_k - 1) 2^{-k}.
cplx square_vertex(const std::vector<Symbol>& w) {
  double theta = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) theta += kPi * (w[k] - 1) * std::ldexp(1.0, -static_cast<int>(k));
  const double r = std::pow(0.5, std::ldexp(1.0, -static_cast<int>(w.size())));
  return std::polar(r, theta);
}

}  // namespace

TEST_CASE("z^2 tree vertices follow the closed form") {
  CodingTree tree(square(), 0.5, square_base());
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> sym(1, 2);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Symbol> w(static_cast<std::size_t>(1 + trial % 12));
    for (auto& s : w) s = static_cast<Symbol>(sym(rng));
    CHECK(chordal_distance(tree.node(w).vertex, square_vertex(w)) < 1e-9);
  }
}

TEST_CASE("edges connect: gamma_n starts at z_{n-1} and maps onto gamma_{n-1}") {
  CodingTree tree(square(), 0.5, square_base());
  const std::vector<Symbol> w{2, 1, 1, 2, 2, 1};
  for (std::size_t n = 2; n <= w.size(); ++n) {
    const std::span<const Symbol> ws(w.data(), n);
    const auto& e = tree.node(ws).edge;
    CHECK(chordal_distance(e.front(), tree.node(ws.first(n - 1)).vertex) < 1e-14);
    const auto& src = tree.node(ws.subspan(1)).edge;
    for (const auto& p : e.points()) CHECK(distance_to_polyline(square()(p), src) < 1e-9);
  }
}

TEST_CASE("full tree of depth 10 and cache pinning") {
  auto tree = build_tree(square(), 0.5, square_base(), 10, BuildMode::Full);
  CHECK(tree.pinned_words().size() == 2046);
  CHECK(tree.cached_nodes() == 2046);
  const std::vector<Symbol> deep(14, 2);
  (void)tree.node(deep);
  CHECK(tree.cached_nodes() > 2046);
  tree.clear_cache();
  CHECK(tree.cached_nodes() == 2046);
  const auto words = tree.pinned_words();
  CHECK(words.front() == std::vector<Symbol>{1});
  CHECK(words.back() == std::vector<Symbol>(10, 2));
}

TEST_CASE("memoized and fresh nodes agree") {
  CodingTree a(square(), 0.5, square_base());
  CodingTree b(square(), 0.5, square_base());
  a.expand_full(6);
  const std::vector<Symbol> w{1, 2, 2, 1, 2, 1};
  const auto& ea = a.node(w).edge;
  const auto& eb = b.node(w).edge;
  REQUIRE(ea.size() == eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) CHECK(ea[i] == eb[i]);
}

TEST_CASE("depth and base curve validation") {
  CHECK_THROWS_AS(build_tree(square(), 0.5, square_base(), 0, BuildMode::Full), Error);
  auto base = square_base();
  // A curve through the critical point 0.
  std::vector<SpherePoint> bad;
  for (int i = 0; i <= 64; ++i) bad.emplace_back(0.5 - 1.2071067811865475 * i / 64.0);
  base[1] = Polyline(bad);
  try {
    CodingTree t(square(), 0.5, base);
    FAIL("expected PostcriticalViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PostcriticalViolation);
  }
}

TEST_CASE("coding points of z^2 land at binary angles") {
  CodingTree tree(square(), 0.5, square_base());
  const auto p = coding_point(tree, SymbolWord::parse("(1)"), 1e-8);
  CHECK(p.converged);
  CHECK(chordal_distance(p.point, 1.0) < 1e-7);
  // 2(1) codes angle pi.
  const auto q = coding_point(tree, SymbolWord::parse("2(1)"), 1e-8);
  CHECK(chordal_distance(q.point, -1.0) < 1e-7);
  // (12): theta = pi (0 + 1/2 + 0 + 1/8 + ...) = 2 pi / 3.
  const auto r = coding_point(tree, SymbolWord::parse("(21)"), 1e-8);
  CHECK(chordal_distance(r.point, std::polar(1.0, 4 * kPi / 3)) < 1e-7);
  CHECK(r.error_bound < 1e-8);
}

TEST_CASE("branch tails") {
  CodingTree tree(square(), 0.5, square_base());
  const std::vector<Symbol> w(12, 1);
  const auto t0 = branch_tail_stats(tree, w, 0);
  const auto t5 = branch_tail_stats(tree, w, 5);
  CHECK(t0.tail_length > t5.tail_length);
  CHECK(t5.tail_diameter <= t5.tail_length + 1e-15);
  CHECK_THROWS_AS(branch_tail_stats(tree, w, 12), Error);
  // Radial tail of 1^n from depth 5 is about 1 - 2^{-1/64}.
  CHECK(tail_estimate(tree, w, 5) == doctest::Approx(1.0 - std::pow(0.5, 1.0 / 64.0)).epsilon(0.02));
  std::ostringstream dump;
  tree.expand_full(2);
  write_tree_dump(dump, tree);
  CHECK(dump.str().find("\n22 ") != std::string::npos);
}
