#include "gctree/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gctree/error.hpp"

namespace gct {

ConditionReport check_condition_i(const RationalMap& map, const std::vector<Polyline>& base_curves, int K,
                                  double margin) {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "K must be >= 1");
  const auto closure = critical_points(map, K).postcritical_closure();
  ConditionReport rep;
  rep.margin = margin;
  rep.postcritical_points = closure.size();
  rep.min_distance = 2.0;
  for (std::size_t j = 0; j < base_curves.size(); ++j) {
    for (const auto& q : closure) {
      const double d = distance_to_polyline(q, base_curves[j]);
      if (d < rep.min_distance) {
        rep.min_distance = d;
        rep.worst_curve = static_cast<int>(j);
        rep.nearest = q;
      }
    }
  }
  rep.pass = rep.min_distance > margin;
  return rep;
}

bool Region::contains(const SpherePoint& z) const {
  if (radius >= 2.0) return true;
  if (kind == Kind::Disc) return chordal_distance(z, center) <= radius;
  return distance_to_polyline(z, curve) <= radius;
}

double Region::exact_area() const {
  if (kind != Kind::Disc) return -1.0;
  return radius >= 2.0 ? kSphereArea : std::numbers::pi * radius * radius;
}

SpherePoint sample_sphere(std::mt19937_64& rng) {
  // Uniform on the unit sphere by height and angle, then stereographic
  // projection from the north pole.
  const double h = 2.0 * uniform53(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform53(rng);
  if (h == 1.0) return SpherePoint::infinity();
  const double s = std::sqrt(std::max(0.0, 1.0 - h * h));
  return SpherePoint(std::polar(s / (1.0 - h), phi));
}

std::vector<VolumeDecayEstimate> estimate_volume_series(const RationalMap& map, const Region& region, int n_max,
                                                        std::size_t samples, std::uint64_t seed) {
  if (n_max < 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 0");
  if (samples < 1000) throw Error(ErrorKind::InvalidArgument, "need at least 1000 samples");
  if (!(region.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "region radius must be positive");
  std::vector<std::size_t> hits(static_cast<std::size_t>(n_max) + 1, 0);
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    SpherePoint z = sample_sphere(rng);
    for (int n = 0; n <= n_max; ++n) {
      if (region.contains(z)) ++hits[static_cast<std::size_t>(n)];
      if (n < n_max) z = map(z);
    }
  }
  std::vector<VolumeDecayEstimate> out;
  for (int n = 0; n <= n_max; ++n) {
    const double frac = static_cast<double>(hits[static_cast<std::size_t>(n)]) / static_cast<double>(samples);
    VolumeDecayEstimate e;
    e.n = n;
    e.samples = samples;
    e.epsilon_hat = frac * kSphereArea;
    e.stderr_ = kSphereArea * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
    out.push_back(e);
  }
  return out;
}

VolumeDecayEstimate estimate_preimage_volume(const RationalMap& map, const Region& region, int n,
                                             std::size_t samples, std::uint64_t seed) {
  return estimate_volume_series(map, region, n, samples, seed).back();
}

double lyapunov_estimate(const RationalMap& map, const std::vector<SpherePoint>& starts, int burn_in, int length) {
  if (starts.empty() || length < 1 || burn_in < 0) throw Error(ErrorKind::InvalidArgument, "need starts and length >= 1");
  double total = 0.0;
  for (const auto& start : starts) {
    SpherePoint z = start;
    for (int i = 0; i < burn_in; ++i) z = map(z);
    double sum = 0.0;
    for (int i = 0; i < length; ++i) {
      const double sd = map.spherical_derivative(z);
      if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw Error(ErrorKind::OrbitEscapedDomain, fmt::format("orbit hit a critical point or left the domain at step {}", i));
      }
      sum += std::log(sd);
      z = map(z);
    }
    total += sum / length;
  }
  return total / static_cast<double>(starts.size());
}

namespace {

struct Tail {
  double length;
  bool slow;
};

Tail measured_tail(CodingTree& tree, const std::vector<Symbol>& word, int n, double ratio_cap) {
  const int last = static_cast<int>(word.size()) - 1;
  double sum = 0.0;
  double prev = -1.0;
  int slow_run = 0;
  double last_len = 0.0, ratio = 0.0;
  for (int k = n + 1; k <= last; ++k) {
    const double len = tree.node(std::span<const Symbol>(word).first(static_cast<std::size_t>(k) + 1)).edge.length();
    sum += len;
    if (prev > 0.0) {
      ratio = len / prev;
      slow_run = ratio > ratio_cap ? slow_run + 1 : 0;
    }
    prev = len;
    last_len = len;
  }
  const double rho = std::min(ratio, ratio_cap);
  const int ratios = last - n - 1;
  const bool slow = ratios >= 1 && slow_run >= std::min(10, ratios);
  return {sum + last_len * rho / (1.0 - rho), slow};
}

}  // namespace

double tail_fraction(CodingTree& tree, BernoulliSampler& sampler, int n, double r, int trials, const TailFractionOptions& opts) {
  if (n < 0 || trials < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 0 and trials >= 1");
  if (sampler.degree() != tree.degree()) throw Error(ErrorKind::InvalidArgument, "sampler and tree degrees differ");
  int good = 0;
  for (int t = 0; t < trials; ++t) {
    const auto word = sampler.draw_word(static_cast<std::size_t>(n + opts.lookahead) + 1);
    try {
      const Tail tail = measured_tail(tree, word, n, opts.ratio_cap);
      if (!tail.slow && tail.length < r) ++good;
    } catch (const Error&) {
      // lift failures count as long tails
    }
    tree.clear_cache();
  }
  return static_cast<double>(good) / trials;
}

SupportDensity support_density_check(CodingTree& tree, BernoulliSampler& sampler,
                                     const std::vector<SpherePoint>& boundary, int trials, double eps, double tol) {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  SupportDensity rep;
  std::vector<SpherePoint> pts;
  CodingPointOptions cpo;
  cpo.max_depth = 80;
  for (int t = 0; t < trials; ++t) {
    std::vector<Symbol> w = sampler.draw_word(static_cast<std::size_t>(cpo.max_depth));
    try {
      const auto cp = coding_point(tree, SymbolWord(w), tol, cpo);
      pts.push_back(cp.point);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SlowConvergence) throw;
      ++rep.slow_words;
    }
    tree.clear_cache();
  }
  rep.sampled_points = pts.size();
  if (boundary.empty()) return rep;
  std::size_t covered = 0;
  for (const auto& b : boundary) {
    double best = 2.0;
    for (const auto& p : pts) best = std::min(best, chordal_distance(b, p));
    if (best <= eps) ++covered;
    rep.max_gap = std::max(rep.max_gap, best);
  }
  rep.fraction_covered = static_cast<double>(covered) / static_cast<double>(boundary.size());
  return rep;
}

void write_volume_csv(std::ostream& out, const std::vector<VolumeDecayEstimate>& series) {
  out << "region,n,epsilon_hat,stderr,samples\n";
  for (const auto& e : series) {
    out << fmt::format("{},{},{:.10g},{:.10g},{}\n", e.region_index, e.n, e.epsilon_hat, e.stderr_, e.samples);
  }
}

}  // namespace gct
