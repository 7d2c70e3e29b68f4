// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "gctree/diagnostics.hpp"
#include "gctree/error.hpp"
#include "gctree/pipeline.hpp"

using namespace gct;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig bundled(const std::string& name) {
  return load_config(std::string(GCTREE_SOURCE_DIR) + "/configs/" + name + ".json");
}

// Everything the harvest needs, built from a config the way the pipeline does.
struct Setup {
  RunConfig cfg;
  RationalMap f;
  BasinRaster raster;
  std::vector<SpherePoint> boundary;
  std::unique_ptr<CodingTree> tree;

  explicit Setup(RunConfig c)
      : cfg(std::move(c)), f(cfg.map.numerator, cfg.map.denominator) {
    PeriodicOrbitRecord cycle;
    double best = 3.0;
    for (const auto& o : find_periodic_orbits(f, cfg.basin.period)) {
      if (o.kind != OrbitKind::Attracting && o.kind != OrbitKind::Parabolic) continue;
      for (const auto& p : o.points) {
        if (chordal_distance(p, cfg.basin.near) < best) {
          best = chordal_distance(p, cfg.basin.near);
          cycle = o;
        }
      }
    }
    raster = rasterize_basin(f, cycle, cfg.raster.bounds, cfg.raster.nx, cfg.raster.ny);
    boundary = boundary_point_set(raster);
    std::vector<Polyline> curves;
    for (const auto& cv : cfg.tree.base_curves) curves.emplace_back(std::vector<SpherePoint>(cv.begin(), cv.end()));
    TreeOptions to;
    to.max_step = cfg.tree.max_step;
    tree = std::make_unique<CodingTree>(cfg.map.iterate == 1 ? f : f.iterate(cfg.map.iterate), cfg.tree.root,
                                        std::move(curves), to);
  }

  HarvestResult run_harvest() {
    HarvestParams hp;
    hp.trials = cfg.harvest.trials;
    hp.M_min = cfg.harvest.M_min;
    hp.N_max = cfg.harvest.N_max;
    hp.radii = cfg.harvest.radii;
    hp.tail_tol = cfg.harvest.tail_tol;
    hp.seed = cfg.seed;
    return harvest(f, cfg.map.iterate, *tree, cfg.weights, boundary, hp);
  }
};

// Harvests are shared between criteria; their runtimes are those of the first build.
struct Harvested {
  std::unique_ptr<Setup> setup;
  HarvestResult result;
  double seconds = 0.0;
};

Harvested& z2_harvest() {
  static Harvested h = [] {
    Harvested x;
    const auto t0 = std::chrono::steady_clock::now();
    x.setup = std::make_unique<Setup>(bundled("z2"));
    x.result = x.setup->run_harvest();
    x.seconds = seconds_since(t0);
    return x;
  }();
  return h;
}

Harvested& basilica_harvest() {
  static Harvested h = [] {
    Harvested x;
    const auto t0 = std::chrono::steady_clock::now();
    x.setup = std::make_unique<Setup>(bundled("basilica"));
    x.result = x.setup->run_harvest();
    x.seconds = seconds_since(t0);
    return x;
  }();
  return h;
}

// Primitive period of k/(2^p - 1) under doubling.
int doubling_period(std::uint64_t k, int p) {
  const std::uint64_t n = (std::uint64_t{1} << p) - 1;
  std::uint64_t x = k % n;
  for (int j = 1; j <= p; ++j) {
    x = (2 * x) % n;
    if (x == k % n) return j;
  }
  return p;
}

Outcome criterion_1() {
  auto& h = z2_harvest();
  const auto& res = h.result;
  double worst = 0.0;
  int wrong_period = 0;
  for (const auto& r : res.records) {
    const int p = r.period;
    const double n = std::ldexp(1.0, p) - 1.0;
    const cplx z = r.point.value();
    double a = std::arg(z);
    if (a < 0) a += 2.0 * kPi;
    const double k = std::round(a * n / (2.0 * kPi));
    const cplx root = std::polar(1.0, 2.0 * kPi * k / n);
    worst = std::max(worst, chordal_distance(r.point, root));
    if (doubling_period(static_cast<std::uint64_t>(k), p) != p) ++wrong_period;
  }
  const double cover = res.density.covering_radius;
  Outcome o;
  o.pass = !res.records.empty() && worst < 1e-8 && wrong_period == 0 && cover < 0.1 && h.seconds < 60.0 &&
           h.setup->cfg.harvest.trials == 200 && h.setup->cfg.harvest.N_max == 12 && h.setup->cfg.raster.nx == 512 &&
           h.setup->cfg.raster.ny == 512;
  o.detail = fmt::format("{} records, worst root distance {:.2e}, wrong periods {}, covering radius {:.4f}, {:.1f} s",
                         res.records.size(), worst, wrong_period, cover, h.seconds);
  return o;
}

Outcome criterion_2() {
  auto& h = basilica_harvest();
  const auto t0 = std::chrono::steady_clock::now();
  const RationalMap& f = h.setup->f;
  std::map<int, std::vector<PeriodicOrbitRecord>> census;
  int checked = 0, unmatched = 0;
  double worst = 0.0;
  for (const auto& r : h.result.records) {
    if (r.period > 10) continue;
    auto it = census.find(r.period);
    if (it == census.end()) it = census.emplace(r.period, find_periodic_orbits(f, r.period)).first;
    double best = 3.0;
    for (const auto& o : it->second) {
      if (o.kind != OrbitKind::Repelling) continue;
      for (const auto& p : o.points) best = std::min(best, chordal_distance(p, r.point));
    }
    worst = std::max(worst, best);
    if (!(best < 1e-7)) ++unmatched;
    ++checked;
  }
  const double alpha = (1.0 - std::sqrt(5.0)) / 2.0;
  bool alpha_found = false;
  double alpha_mult_err = 1.0;
  for (const auto& r : h.result.records) {
    if (chordal_distance(r.point, alpha) < 1e-9) {
      alpha_found = true;
      alpha_mult_err = std::abs(r.multiplier - (1.0 - std::sqrt(5.0)));
    }
  }
  const double total = h.seconds + seconds_since(t0);
  Outcome o;
  o.pass = checked > 0 && unmatched == 0 && alpha_found && alpha_mult_err < 1e-8 && total < 120.0;
  o.detail = fmt::format("{} records with period <= 10 checked, {} unmatched, worst {:.2e}; alpha {} (multiplier error "
                         "{:.1e}); {:.1f} s",
                         checked, unmatched, worst, alpha_found ? "found" : "missing", alpha_mult_err, total);
  return o;
}

Outcome criterion_3() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int records = 0, bad_lambda = 0, bad_image = 0, bad_spread = 0;
  double worst_spread = 0.0;
  for (Harvested* h : {&z2_harvest(), &basilica_harvest()}) {
    for (const auto& r : h->result.records) {
      ++records;
      const auto& c = r.certificate;
      if (!(c.lambda_est * 1.5 < 1.0)) ++bad_lambda;
      for (const auto& img : c.image_samples) {
        if (!(chordal_distance(img, c.center) < c.radius)) ++bad_image;
      }
      const InverseBranch F(h->setup->tree->map(), r.tree_period, c.center, r.anchor_image,
                            h->setup->tree->options().lift);
      double spread = 0.0;
      for (int s = 0; s < 16; ++s) {
        const cplx dir = std::polar(1.0, 2.0 * kPi * u(rng));
        SpherePoint x = chordal_ray_point(c.center, dir, c.radius * u(rng));
        for (int it = 0; it < 200; ++it) {
          const SpherePoint y = F(x);
          const double step = chordal_distance(x, y);
          x = y;
          if (step < 1e-15) break;
        }
        spread = std::max(spread, chordal_distance(x, r.point));
      }
      worst_spread = std::max(worst_spread, spread);
      if (!(spread < 1e-9)) ++bad_spread;
    }
  }
  Outcome o;
  o.pass = records > 0 && bad_lambda == 0 && bad_image == 0 && bad_spread == 0;
  o.detail = fmt::format("{} records (z^2 and basilica): lambda*1.5 >= 1 in {}, images outside ball {}, spread "
                         "failures {}, worst spread {:.2e}",
                         records, bad_lambda, bad_image, bad_spread, worst_spread);
  return o;
}

Outcome criterion_4() {
  int records = 0, bad_length = 0, bad_image = 0, bad_end = 0;
  double worst_image = 0.0, worst_end = 0.0;
  for (Harvested* h : {&z2_harvest(), &basilica_harvest()}) {
    const RationalMap& g = h->setup->tree->map();
    const double tail_tol = h->setup->cfg.harvest.tail_tol;
    for (const auto& r : h->result.records) {
      ++records;
      const auto& c = r.certificate;
      const double bound = r.gamma.length() * c.distortion_est / (1.0 - c.lambda_est);
      if (!(r.Gamma_length <= bound * (1.0 + 1e-12))) ++bad_length;
      // Points of Gamma past the seed arc map back onto Gamma under g^N.
      const auto& pts = r.Gamma.points();
      for (std::size_t i = r.gamma.size(); i < pts.size(); ++i) {
        const double d = distance_to_polyline(iterate_point(g, pts[i], r.tree_period), r.Gamma);
        worst_image = std::max(worst_image, d);
        if (!(d < 1e-6)) ++bad_image;
      }
      const double end = chordal_distance(r.Gamma.back(), r.point);
      worst_end = std::max(worst_end, end);
      if (!(end <= 1e-6 + tail_tol)) ++bad_end;
    }
  }
  Outcome o;
  o.pass = records > 0 && bad_length == 0 && bad_image == 0 && bad_end == 0;
  o.detail = fmt::format("{} records: length bound violations {}, forward-image misses {} (worst {:.2e}), endpoint "
                         "misses {} (worst {:.2e})",
                         records, bad_length, bad_image, worst_image, bad_end, worst_end);
  return o;
}

// Pilot values committed with the sources.
std::map<std::string, std::vector<double>> read_pilot() {
  std::ifstream in(std::string(GCTREE_SOURCE_DIR) + "/tests/fixtures/volume_pilot.csv");
  std::map<std::string, std::vector<double>> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string map, region, n, eps;
    std::getline(ss, map, ',');
    std::getline(ss, region, ',');
    std::getline(ss, n, ',');
    std::getline(ss, eps, ',');
    out[map].push_back(std::stod(eps));
  }
  return out;
}

Outcome criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pilot = read_pilot();
  std::vector<std::string> parts;
  bool ok = pilot.size() == 2;
  for (const char* name : {"z2", "basilica"}) {
    const RunConfig cfg = bundled(name);
    const RationalMap f(cfg.map.numerator, cfg.map.denominator);
    const auto& rc = cfg.diagnostics.regions.at(0);
    const auto series = estimate_volume_series(f, Region::disc(rc.center, rc.radius), 12, 100000,
                                               derive_seed(cfg.seed, 1000));
    int below = -1;
    for (const auto& e : series) {
      if (below < 0 && e.epsilon_hat < 1e-3) below = e.n;
    }
    const auto it = pilot.find(name);
    bool same = it != pilot.end() && it->second.size() == series.size();
    for (std::size_t i = 0; same && i < series.size(); ++i) {
      same = std::abs(series[i].epsilon_hat - it->second[i]) <= 1e-9 * (1.0 + it->second[i]);
    }
    ok = ok && below >= 0 && below <= 12 && same && rc.radius == 0.1;
    parts.push_back(fmt::format("{} disc ({:.2g},{:.2g}) r={}: eps(0)={:.2e}, first below 1e-3 at n={}, pilot {}", name,
                                rc.center.real(), rc.center.imag(), rc.radius, series.front().epsilon_hat, below,
                                same ? "matches" : "differs"));
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = ok && t < 30.0;
  o.detail = fmt::format("{}; {}; {:.1f} s", parts[0], parts.size() > 1 ? parts[1] : "", t);
  return o;
}

Outcome criterion_6() {
  const auto sq = RationalMap::polynomial({0.0, 0.0, 1.0});
  std::vector<SpherePoint> starts;
  for (int k = 0; k < 16; ++k) starts.emplace_back(std::polar(1.0, 2.0 * kPi * (k + 0.37) / 16.0));
  const double est = lyapunov_estimate(sq, starts, 0, 30);
  const double err = std::abs(est - std::log(2.0));
  auto& h = basilica_harvest();
  double min_avg = INFINITY;
  for (const auto& r : h.result.records) {
    min_avg = std::min(min_avg, lyapunov_estimate(h.setup->f, {r.point}, 0, r.period));
  }
  Outcome o;
  o.pass = err < 1e-6 && !h.result.records.empty() && min_avg > 0.0;
  o.detail = fmt::format("z^2 circle orbits: |estimate - log 2| = {:.2e}; basilica harvested orbits: smallest average "
                         "{:.4f} over {} records",
                         err, min_avg, h.result.records.size());
  return o;
}

Outcome criterion_7() {
  const RunConfig cfg = bundled("z2");
  const auto f = RationalMap::polynomial({0.0, 0.0, 1.0});
  std::vector<Polyline> curves;
  for (const auto& cv : cfg.tree.base_curves) curves.emplace_back(std::vector<SpherePoint>(cv.begin(), cv.end()));
  TreeOptions to;
  to.max_step = cfg.tree.max_step;
  CodingTree full = build_tree(f, cfg.tree.root, curves, 10, BuildMode::Full, {}, to);
  const auto words = full.pinned_words();
  double worst = 0.0;
  for (const auto& w : words) {
    if (w.size() < 2) continue;
    const std::span<const Symbol> ws(w);
    const auto& source = full.node(ws.subspan(1)).edge;
    for (const auto& p : full.node(ws).edge.points()) worst = std::max(worst, distance_to_polyline(f(p), source));
    worst = std::max(worst, chordal_distance(f(full.node(ws).vertex), full.node(ws.subspan(1)).vertex));
  }
  std::mt19937_64 rng(11);
  std::vector<SymbolWord> leaves;
  for (int i = 0; i < 50; ++i) {
    std::vector<Symbol> w(10);
    for (auto& s : w) s = static_cast<Symbol>(1 + rng() % 2);
    leaves.emplace_back(w);
  }
  CodingTree pref = build_tree(f, cfg.tree.root, curves, 10, BuildMode::Prefixes, leaves, to);
  double worst_leaf = 0.0;
  for (const auto& l : leaves) {
    worst_leaf = std::max(worst_leaf, chordal_distance(pref.node(l.symbols()).vertex, full.node(l.symbols()).vertex));
  }
  Outcome o;
  o.pass = words.size() == 2046 && worst < 1e-9 && worst_leaf < 1e-12;
  o.detail = fmt::format("{} edges, worst commutation residual {:.2e}, worst prefix-mode leaf difference {:.2e}",
                         words.size(), worst, worst_leaf);
  return o;
}

Outcome criterion_8() {
  const RunConfig cfg = bundled("z2");
  const auto f = RationalMap::polynomial({0.0, 0.0, 1.0});
  std::vector<Polyline> curves;
  for (const auto& cv : cfg.tree.base_curves) curves.emplace_back(std::vector<SpherePoint>(cv.begin(), cv.end()));
  TreeOptions to;
  to.max_step = cfg.tree.max_step;
  CodingTree tree(f, cfg.tree.root, curves, to);
  double frac[3];
  const int ns[3] = {5, 10, 20};
  for (int i = 0; i < 3; ++i) {
    BernoulliSampler sampler({0.5, 0.5}, 77);
    frac[i] = tail_fraction(tree, sampler, ns[i], 0.1, 200);
  }
  Outcome o;
  o.pass = frac[0] <= frac[1] && frac[1] <= frac[2] && frac[2] >= 0.95;
  o.detail = fmt::format("fractions at n = 5, 10, 20: {:.3f}, {:.3f}, {:.3f}", frac[0], frac[1], frac[2]);
  return o;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / fmt::format("gctree_acceptance_{}_{}", name, ::getpid());
  fs::remove_all(p);
  return p;
}

Outcome criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = bundled("cauliflower");
  cfg.output = scratch_dir("cauliflower").string();
  const RunManifest m = run_pipeline(cfg);
  bool all_ok = m.exit_code == 0;
  for (const auto& s : m.stages) all_ok = all_ok && s.status == "ok";
  // Cell size of the raster the boundary came from.
  const double cell = std::max((cfg.raster.bounds.xmax - cfg.raster.bounds.xmin) / cfg.raster.nx,
                               (cfg.raster.bounds.ymax - cfg.raster.bounds.ymin) / cfg.raster.ny);
  int repelling_near = 0, records = 0;
  std::ifstream in(fs::path(cfg.output) / "harvest.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    ++records;
    const auto kpos = line.find("\"kind\":\"repelling\"");
    const auto bpos = line.find("\"boundary_distance\":");
    if (kpos == std::string::npos || bpos == std::string::npos) continue;
    const double bd = std::stod(line.substr(bpos + 20));
    if (bd >= 0.0 && bd <= 3.0 * cell) ++repelling_near;
  }
  int retries = -1;
  bool logged = false;
  {
    std::ifstream log(fs::path(cfg.output) / "harvest_log.txt");
    std::string first;
    std::getline(log, first);
    const auto pos = first.find("slow_convergence_retries ");
    if (pos != std::string::npos) {
      retries = std::stoi(first.substr(pos + 25));
      logged = true;
    }
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = all_ok && repelling_near >= 1 && logged && t < 300.0;
  o.detail = fmt::format("pipeline exit {}, {} records, {} repelling within 3 cells ({:.4f}), SlowConvergence retries "
                         "logged: {}, {:.1f} s",
                         m.exit_code, records, repelling_near, 3.0 * cell, retries, t);
  fs::remove_all(cfg.output);
  return o;
}

Outcome criterion_10() {
  RunConfig a = bundled("z2");
  RunConfig b = a;
  a.output = scratch_dir("det_a").string();
  b.output = scratch_dir("det_b").string();
  const RunManifest ma = run_pipeline(a);
  const RunManifest mb = run_pipeline(b);
  int csv = 0, csv_diff = 0;
  bool same_hashes = ma.files.size() == mb.files.size() && ma.config_sha256 != "" && ma.exit_code == 0;
  for (std::size_t i = 0; same_hashes && i < ma.files.size(); ++i) {
    same_hashes = ma.files[i].name == mb.files[i].name && ma.files[i].sha256 == mb.files[i].sha256;
  }
  for (const auto& e : fs::directory_iterator(a.output)) {
    if (e.path().extension() != ".csv") continue;
    ++csv;
    std::ifstream fa(e.path(), std::ios::binary), fb(fs::path(b.output) / e.path().filename(), std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) ++csv_diff;
  }
  const bool verified = verify_manifest(a.output).empty() && verify_manifest(b.output).empty();
  Outcome o;
  o.pass = same_hashes && csv > 0 && csv_diff == 0 && verified;
  o.detail = fmt::format("{} files hashed, manifest hashes {}, {} CSVs with {} differences", ma.files.size(),
                         same_hashes ? "identical" : "differ", csv, csv_diff);
  fs::remove_all(a.output);
  fs::remove_all(b.output);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"z^2 harvest matches roots of unity", criterion_1},
      {"basilica harvest matches the census", criterion_2},
      {"contraction certificates", criterion_3},
      {"access curve invariants", criterion_4},
      {"preimage volume decay", criterion_5},
      {"Lyapunov exponents", criterion_6},
      {"tree consistency", criterion_7},
      {"tail-length trend", criterion_8},
      {"parabolic smoke test", criterion_9},
      {"determinism", criterion_10},
  };
  int failed = 0;
  int i = 0;
  for (const auto& [name, fn] : criteria) {
    ++i;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", i, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
