#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gctree/error.hpp"
#include "gctree/periodics.hpp"

using namespace gct;

namespace {

constexpr double kPi = std::numbers::pi;

RationalMap square() { return RationalMap::polynomial({0.0, 0.0, 1.0}); }

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

std::vector<SpherePoint> unit_circle(int n) {
  std::vector<SpherePoint> pts;
  for (int k = 0; k < n; ++k) pts.emplace_back(std::polar(1.0, 2.0 * kPi * k / n));
  return pts;
}

SymbolSource constant(Symbol s) {
  return [s](std::size_t) { return s; };
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

TEST_CASE("anchor depth from the tail condition") {
  CodingTree tree(square(), 0.5, square_base());
  const auto a = anchor_for_word(tree, constant(1), 3, 0.3);
  CHECK(a.M >= 3);
  CHECK(a.tail < 0.1);
  CHECK(std::abs(a.anchor.value()) > 0.9);
  CHECK(std::abs(a.anchor.value()) < 1.0);
  CHECK(a.prefix.size() == static_cast<std::size_t>(a.M) + 1);

  CHECK(anchor_for_word(tree, constant(1), 5, 2.5).M == 5);
  // Smaller balls push the anchor deeper.
  CHECK(anchor_for_word(tree, constant(1), 3, 0.01).M > a.M);
  CHECK(kind_of([&] { anchor_for_word(tree, constant(1), -1, 0.3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("fixed point 1 of z^2") {
  CodingTree tree(square(), 0.5, square_base());
  const auto a = anchor_for_word(tree, constant(1), 3, 0.3);
  const auto cand = find_recurrence(tree, a, 0.3, 12);
  CHECK(cand.N == cand.M + 1);
  CHECK(cand.connector.empty());
  const auto post = critical_points(square(), 64).postcritical_closure();
  auto rec = extract_periodic_point(square(), 1, tree, cand, post, unit_circle(64));
  CHECK(std::abs(rec.point.value() - 1.0) < 1e-12);
  CHECK(rec.period == 1);
  CHECK(std::abs(rec.multiplier - 2.0) < 1e-9);
  CHECK(rec.kind == OrbitKind::Repelling);
  CHECK(rec.boundary_distance < 1e-12);
  CHECK(rec.certificate.lambda_est < 1.0);

  build_access_curve(tree, cand, rec, 1e-6);
  CHECK(chordal_distance(rec.Gamma.back(), rec.point) < 1e-6);
  // Gamma length is bounded by |gamma| / (1 - lambda).
  CHECK(rec.Gamma_length <= rec.gamma.length() / (1.0 - rec.certificate.lambda_est) + 1e-9);
  CHECK(chordal_distance(rec.Gamma.front(), cand.anchor) < 1e-12);
}

TEST_CASE("period two of z^2 through a periodic word") {
  CodingTree tree(square(), 0.5, square_base());
  const auto post = critical_points(square(), 64).postcritical_closure();
  const SymbolWord w = SymbolWord::parse("(12)");
  const auto cand = candidate_for_periodic_word(tree, w, 3, 0.3, 12);
  CHECK(cand.N % 2 == 0);
  CHECK(cand.word() == w);
  auto rec = extract_periodic_point(square(), 1, tree, cand, post, {});
  const cplx z = rec.point.value();
  CHECK(rec.period == 2);
  CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(std::arg(z)) - 2.0 * kPi / 3.0) < 1e-9);
  CHECK(std::abs(rec.multiplier - 4.0) < 1e-8);
  CHECK(rec.boundary_distance == -1.0);

  CHECK(kind_of([&] { candidate_for_periodic_word(tree, SymbolWord::parse("1(2)"), 3, 0.3, 12); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { candidate_for_periodic_word(tree, w, 3, 0.3, 2); }) == ErrorKind::NoRecurrence);
}

TEST_CASE("harvest on z^2 finds roots of unity") {
  CodingTree tree(square(), 0.5, square_base());
  HarvestParams hp;
  hp.trials = 30;
  hp.N_max = 8;
  hp.seed = 7;
  const auto boundary = unit_circle(256);
  const auto res = harvest(square(), 1, tree, {0.5, 0.5}, boundary, hp);
  REQUIRE_FALSE(res.records.empty());
  CHECK(res.successful_trials > 0);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    const cplx z = r.point.value();
    // z^(2^p - 1) = 1.
    const double n = std::ldexp(1.0, r.period) - 1.0;
    CHECK(std::abs(std::abs(z) - 1.0) < 1e-10);
    const double k = std::arg(z) * n / (2.0 * kPi);
    CHECK(std::abs(k - std::round(k)) < 1e-7);
    CHECK(std::abs(std::abs(r.multiplier) - std::ldexp(1.0, r.period)) < 1e-6);
    CHECK(r.tail_bound < hp.tail_tol);
    if (i > 0) {
      const auto& q = res.records[i - 1];
      CHECK(q.period <= r.period);
      if (q.period == r.period) CHECK(chordal_distance(q.point, r.point) >= hp.dedup_tolerance);
    }
  }
  CHECK(res.density.distance.size() == boundary.size());
  CHECK(res.density.covering_radius > 0.0);
  CHECK(res.density.covering_radius < 1.0);

  // Same seed, same records.
  CodingTree tree2(square(), 0.5, square_base());
  const auto again = harvest(square(), 1, tree2, {0.5, 0.5}, boundary, hp);
  REQUIRE(again.records.size() == res.records.size());
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    CHECK(again.records[i].point.value() == res.records[i].point.value());
  }

  std::ostringstream js, csv;
  write_harvest_jsonl(js, res.records);
  write_density_csv(csv, res.density);
  const std::string lines = js.str();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == static_cast<long>(res.records.size()));
  CHECK(csv.str().rfind("x,y,distance\n", 0) == 0);
}

TEST_CASE("covering radius shrinks as records accumulate") {
  const auto boundary = unit_circle(128);
  std::vector<PeriodicAccessRecord> recs;
  double prev = 3.0;
  for (int k = 0; k < 16; ++k) {
    PeriodicAccessRecord r;
    r.point = std::polar(1.0, 2.0 * kPi * k / 16.0);
    recs.push_back(r);
    const double c = density_report(boundary, recs).covering_radius;
    CHECK(c <= prev);
    prev = c;
  }
  CHECK(prev < 2.0 * std::sin(kPi / 32.0) * 1.0001);
}

TEST_CASE("harvest failures") {
  CodingTree tree(square(), 0.5, square_base());
  HarvestParams hp;
  hp.trials = 0;
  CHECK(kind_of([&] { harvest(square(), 1, tree, {0.5, 0.5}, {}, hp); }) == ErrorKind::EmptyHarvest);
  hp.trials = 3;
  hp.N_max = 1;
  hp.M_min = 3;
  // No connector fits when N_max <= M.
  CHECK(kind_of([&] { harvest(square(), 1, tree, {0.5, 0.5}, {}, hp); }) == ErrorKind::EmptyHarvest);
}

namespace {

RationalMap cauliflower() { return RationalMap::polynomial({0.25, 0.0, 1.0}); }

// Root 0.3i; the second curve passes left of the postcritical segment [0, 1/2].
std::vector<Polyline> cauliflower_base() {
  const cplx root(0.0, 0.3);
  const cplx q = std::sqrt(cplx(-0.25, 0.3));
  std::vector<SpherePoint> a, b;
  for (int i = 0; i <= 16; ++i) a.emplace_back(root + (q - root) * (i / 16.0));
  for (int i = 0; i <= 16; ++i) b.emplace_back(root + (cplx(-0.3) - root) * (i / 16.0));
  for (int i = 1; i <= 16; ++i) b.emplace_back(cplx(-0.3) + (-q + 0.3) * (i / 16.0));
  return {Polyline(a), Polyline(b)};
}

}  // namespace

TEST_CASE("words running into the parabolic point converge slowly") {
  CodingTree tree(cauliflower(), cplx(0.0, 0.3), cauliflower_base());
  int slow = 0;
  for (Symbol s : {Symbol{1}, Symbol{2}}) {
    if (kind_of([&] { anchor_for_word(tree, constant(s), 3, 0.075); }) == ErrorKind::SlowConvergence) ++slow;
  }
  CHECK(slow >= 1);

  // Biased weights make such words common; retries are counted and the harvest goes on.
  HarvestParams hp;
  hp.trials = 30;
  hp.N_max = 12;
  hp.radii = {0.02};
  const auto res = harvest(cauliflower(), 1, tree, {0.9, 0.1}, {}, hp);
  CHECK(res.slow_convergence_retries > 0);
  CHECK_FALSE(res.records.empty());
  const bool logged = std::any_of(res.log.begin(), res.log.end(),
                                  [](const std::string& l) { return l.find("SlowConvergence") != std::string::npos; });
  CHECK(logged);
}
