#include "gctree/census.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gctree/error.hpp"

namespace gct {

namespace {

constexpr double kPi = std::numbers::pi;

// Homogeneous coordinates of f^k(z) and their z-derivatives, kept at unit
// scale. Only ratios of these four numbers are meaningful.
struct Homogeneous {
  cplx X, Y, dX, dY;
};

Homogeneous iterate_homogeneous(const RationalMap& map, cplx z, int n) {
  const Poly& P = map.numerator();
  const Poly& Q = map.denominator();
  const int d = map.degree();
  Homogeneous h{z, 1.0, 1.0, 0.0};
  std::vector<cplx> xp(static_cast<std::size_t>(d) + 1), yp(static_cast<std::size_t>(d) + 1);
  for (int step = 0; step < n; ++step) {
    const double s = std::max(std::abs(h.X), std::abs(h.Y));
    if (s > 0.0) {
      h.X /= s;
      h.Y /= s;
      h.dX /= s;
      h.dY /= s;
    }
    xp[0] = yp[0] = 1.0;
    for (int i = 1; i <= d; ++i) {
      xp[static_cast<std::size_t>(i)] = xp[static_cast<std::size_t>(i) - 1] * h.X;
      yp[static_cast<std::size_t>(i)] = yp[static_cast<std::size_t>(i) - 1] * h.Y;
    }
    auto form = [&](const Poly& A, cplx& val, cplx& dx, cplx& dy) {
      val = dx = dy = 0.0;
      for (std::size_t i = 0; i < A.size(); ++i) {
        const std::size_t j = static_cast<std::size_t>(d) - i;
        val += A[i] * xp[i] * yp[j];
        if (i > 0) dx += static_cast<double>(i) * A[i] * xp[i - 1] * yp[j];
        if (j > 0) dy += static_cast<double>(j) * A[i] * xp[i] * yp[j - 1];
      }
    };
    cplx p, px, py, q, qx, qy;
    form(P, p, px, py);
    form(Q, q, qx, qy);
    const cplx ndX = px * h.dX + py * h.dY;
    const cplx ndY = qx * h.dX + qy * h.dY;
    h = {p, q, ndX, ndY};
  }
  return h;
}

// p(z)/p'(z) for the numerator p = X_n - z Y_n of f^n(z) - z.
cplx fixed_point_newton_ratio(const RationalMap& map, cplx z, int n) {
  const Homogeneous h = iterate_homogeneous(map, z, n);
  const cplx num = h.X - z * h.Y;
  const cplx den = h.dX - h.Y - z * h.dY;
  if (num == cplx(0.0)) return 0.0;
  if (den == cplx(0.0) || !std::isfinite(std::abs(num / den))) return 0.0;
  return num / den;
}

double polynomial_escape_radius(const RationalMap& map) {
  const Poly& P = map.numerator();
  const double lead = std::abs(P.back()) / std::abs(map.denominator().front());
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < P.size(); ++i) rest += std::abs(P[i]);
  rest /= std::abs(map.denominator().front());
  return std::max(1.0, (2.0 + rest) / lead);
}

bool sphere_less(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinite() || b.is_infinite()) return a.is_finite() && b.is_infinite();
  return root_less(a.value(), b.value());
}

}  // namespace

std::string_view to_string(OrbitKind kind) {
  switch (kind) {
    case OrbitKind::Attracting: return "attracting";
    case OrbitKind::Repelling: return "repelling";
    case OrbitKind::Parabolic: return "parabolic";
    case OrbitKind::Indifferent: return "indifferent";
  }
  return "unknown";
}

OrbitKind classify_multiplier(cplx m) {
  const double r = std::abs(m);
  if (std::abs(r - 1.0) <= 1e-8) {
    const double turns = std::arg(m) / (2.0 * kPi);
    for (int q = 1; q <= 64; ++q) {
      const double k = std::round(turns * q);
      if (std::abs(m - std::polar(1.0, 2.0 * kPi * k / q)) < 1e-8) return OrbitKind::Parabolic;
    }
    return OrbitKind::Indifferent;
  }
  return r < 1.0 ? OrbitKind::Attracting : OrbitKind::Repelling;
}

std::vector<SpherePoint> fixed_points_of_iterate(const RationalMap& map, int n, const CensusOptions& opts) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "period must be >= 1");
  const double dn = std::pow(static_cast<double>(map.degree()), n);
  if (dn > opts.max_degree) {
    throw Error(ErrorKind::DegreeOverflow, fmt::format("degree {}^{} exceeds {}", map.degree(), n, opts.max_degree));
  }
  const bool inf_fixed = iterate_point(map, SpherePoint::infinity(), n).is_infinite();
  const int degree = static_cast<int>(dn) + (inf_fixed ? 0 : 1);
  const double radius = map.is_polynomial() ? polynomial_escape_radius(map) : 1.0;
  auto ratio = [&](cplx z) { return fixed_point_newton_ratio(map, z, n); };
  std::vector<cplx> roots = aberth_implicit(degree, radius, ratio, opts.max_iterations);

  for (auto& z : roots) {
    for (int it = 0; it < 8; ++it) {
      const cplx step = ratio(z);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag()) || std::abs(step) > 1e-6 * (1.0 + std::abs(z))) break;
      z -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
    }
  }

  // Merge multiple roots.
  std::vector<SpherePoint> pts;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    cplx sum = roots[i];
    int count = 1;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (!used[j] && chordal_distance(roots[i], roots[j]) < opts.cluster_tolerance) {
        used[j] = true;
        sum += roots[j];
        ++count;
      }
    }
    pts.emplace_back(sum / static_cast<double>(count));
  }
  if (inf_fixed) pts.push_back(SpherePoint::infinity());

  for (const auto& p : pts) {
    const double res = chordal_distance(iterate_point(map, p, n), p);
    if (!(res < 1e-10)) {
      throw Error(ErrorKind::NoConvergence, fmt::format("periodic point residual {:.3g} for period {}", res, n));
    }
  }
  std::sort(pts.begin(), pts.end(), sphere_less);
  return pts;
}

PeriodicOrbitRecord orbit_record(const RationalMap& map, const SpherePoint& point, int period) {
  if (period < 1) throw Error(ErrorKind::InvalidArgument, "period must be >= 1");
  PeriodicOrbitRecord rec;
  rec.period = period;
  rec.points.push_back(point);
  for (int i = 1; i < period; ++i) rec.points.push_back(map(rec.points.back()));
  rec.multiplier = cycle_multiplier(map, rec.points);
  rec.kind = classify_multiplier(rec.multiplier);
  return rec;
}

std::vector<PeriodicOrbitRecord> find_periodic_orbits(const RationalMap& map, int n, const CensusOptions& opts) {
  const auto all = fixed_points_of_iterate(map, n, opts);
  // Keep the points of exact period n.
  std::vector<SpherePoint> pts;
  for (const auto& p : all) {
    bool lower = false;
    for (int k = 1; k < n && !lower; ++k) {
      if (n % k == 0 && chordal_distance(iterate_point(map, p, k), p) < 1e-8) lower = true;
    }
    if (!lower) pts.push_back(p);
  }
  std::vector<PeriodicOrbitRecord> out;
  std::vector<bool> used(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    PeriodicOrbitRecord rec;
    rec.period = n;
    rec.points.push_back(pts[i]);
    for (int k = 1; k < n; ++k) {
      const SpherePoint next = map(rec.points.back());
      std::size_t best = pts.size();
      double bd = 1e300;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (used[j]) continue;
        const double dist = chordal_distance(pts[j], next);
        if (dist < bd) {
          bd = dist;
          best = j;
        }
      }
      if (best == pts.size() || bd > 1e-6) {
        throw Error(ErrorKind::NoConvergence, fmt::format("cannot close a period-{} orbit (gap {:.3g})", n, bd));
      }
      used[best] = true;
      rec.points.push_back(pts[best]);
    }
    rec.multiplier = cycle_multiplier(map, rec.points);
    rec.kind = classify_multiplier(rec.multiplier);
    out.push_back(std::move(rec));
  }
  return out;
}

cplx BasinRaster::center(int i, int j) const {
  return {bounds.xmin + (i + 0.5) * cell_width(), bounds.ymax - (j + 0.5) * cell_height()};
}

std::optional<std::size_t> BasinRaster::cell_of(cplx z) const {
  const double fx = (z.real() - bounds.xmin) / cell_width();
  const double fy = (bounds.ymax - z.imag()) / cell_height();
  if (!(fx >= 0.0 && fy >= 0.0 && fx < nx && fy < ny)) return std::nullopt;
  return static_cast<std::size_t>(fy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(fx);
}

std::vector<std::size_t> compute_boundary_cells(int nx, int ny, const std::vector<int>& labels) {
  std::vector<std::size_t> out;
  auto at = [&](int i, int j) { return labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)]; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int self = at(i, j);
      bool mixed = false;
      if (i > 0) mixed |= at(i - 1, j) != self;
      if (i + 1 < nx) mixed |= at(i + 1, j) != self;
      if (j > 0) mixed |= at(i, j - 1) != self;
      if (j + 1 < ny) mixed |= at(i, j + 1) != self;
      if (mixed) out.push_back(static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i));
    }
  }
  return out;
}

namespace {

struct Petal {
  cplx p;
  cplx axis;  // unit attracting direction
};

bool in_sector(const Petal& pt, cplx z, double rho) {
  const cplx w = z - pt.p;
  const double r = std::abs(w);
  if (!(r < rho) || r == 0.0) return r == 0.0;
  return std::abs(std::arg(w * std::conj(pt.axis))) < kPi / 4.0;
}

// Orbit under g stays in the sector with |z - p| strictly decreasing.
bool petal_holds(const RationalMap& map, int m, const Petal& pt, SpherePoint z, double rho, int steps) {
  double prev = 1e300;
  for (int s = 0; s <= steps; ++s) {
    if (z.is_infinite() || !in_sector(pt, z.value(), rho)) return false;
    const double r = std::abs(z.value() - pt.p);
    if (r == 0.0) return true;
    if (!(r < prev)) return false;
    prev = r;
    z = iterate_point(map, z, m);
  }
  return true;
}

double return_derivative(const RationalMap& map, SpherePoint z, int m) {
  cplx d = 1.0;
  for (int i = 0; i < m; ++i) {
    d *= map.derivative(z);
    z = map(z);
  }
  return std::abs(d);
}

}  // namespace

BasinRaster rasterize_basin(const RationalMap& map, const PeriodicOrbitRecord& cycle, const RasterBounds& bounds,
                            int nx, int ny, const RasterOptions& opts) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidArgument, "raster resolution must be positive");
  if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin)) throw Error(ErrorKind::InvalidArgument, "empty raster bounds");
  if (cycle.points.empty()) throw Error(ErrorKind::InvalidArgument, "empty cycle");
  for (const auto& p : cycle.points) {
    if (p.is_infinite()) throw Error(ErrorKind::InvalidArgument, "basin rasters need a finite cycle");
  }
  const bool parabolic = cycle.kind == OrbitKind::Parabolic;
  if (!parabolic && cycle.kind != OrbitKind::Attracting) {
    throw Error(ErrorKind::InvalidArgument, "basin raster needs an attracting or parabolic cycle");
  }
  const int m = cycle.period;
  const std::size_t np = cycle.points.size();

  BasinRaster raster;
  raster.bounds = bounds;
  raster.nx = nx;
  raster.ny = ny;
  raster.map_fingerprint = map.fingerprint();

  double rho = opts.max_trap_radius;
  std::vector<Petal> petals;
  if (!parabolic) {
    const double bound = (1.0 + std::abs(cycle.multiplier)) / 2.0;
    bool ok = false;
    for (int halving = 0; halving < 30 && !ok; ++halving, rho *= 0.5) {
      ok = true;
      for (const auto& p : cycle.points) {
        if (return_derivative(map, p, m) >= bound) ok = false;
        for (int ring = 1; ring <= 4 && ok; ++ring) {
          for (int a = 0; a < 16 && ok; ++a) {
            const SpherePoint z = chordal_ray_point(p, std::polar(1.0, 2.0 * kPi * a / 16.0 + 0.1 * ring), rho * ring / 4.0);
            if (return_derivative(map, z, m) >= bound) ok = false;
          }
        }
      }
      if (ok) break;
    }
    if (!ok) throw Error(ErrorKind::TrapConstructionFailed, "no trap disc with a contracting return map");
  } else {
    const cplx mult = cycle.multiplier;
    if (std::abs(mult - 1.0) > 1e-8) {
      throw Error(ErrorKind::TrapConstructionFailed, "only parabolic cycles with multiplier 1 are supported");
    }
    for (const auto& p : cycle.points) {
      // a = g''(p)/2 by a Cauchy integral of (g(p+w) - p - w)/w^3.
      const double h = 1e-3;
      cplx a = 0.0;
      const int K = 64;
      for (int k = 0; k < K; ++k) {
        const cplx w = std::polar(h, 2.0 * kPi * k / K);
        const SpherePoint gz = iterate_point(map, p.value() + w, m);
        a += (gz.value() - p.value() - w) / (w * w);
      }
      a /= static_cast<double>(K);
      if (std::abs(a) < 1e-6) throw Error(ErrorKind::TrapConstructionFailed, "degenerate parabolic point (several petals)");
      petals.push_back({p.value(), -std::conj(a) / std::abs(a)});
    }
    bool ok = false;
    for (int halving = 0; halving < 20 && !ok; ++halving) {
      ok = true;
      for (const auto& pt : petals) {
        for (int ring = 1; ring <= 4 && ok; ++ring) {
          for (int a = -3; a <= 3 && ok; ++a) {
            const cplx z = pt.p + pt.axis * std::polar(rho * ring / 4.0 * 0.999, a * kPi / 4.0 * 0.9 / 3.0);
            ok = petal_holds(map, m, pt, z, rho, opts.petal_steps);
          }
        }
      }
      if (!ok) rho *= 0.5;
    }
    if (!ok) throw Error(ErrorKind::TrapConstructionFailed, "attracting petal not identified");
  }
  raster.trap_radius = rho;

  const bool poly = map.is_polynomial();
  const double escape = poly ? polynomial_escape_radius(map) : 0.0;
  const std::size_t cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  // phase = cycle index the cell's component maps to, -1 when not attracted.
  std::vector<int> phase(cells, -1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      SpherePoint z = raster.center(i, j);
      int result = -1;
      for (int t = 0; t <= opts.max_iters && result < 0; ++t) {
        if (z.is_infinite()) break;
        if (poly && z.norm2() > escape * escape) break;
        for (std::size_t k = 0; k < np; ++k) {
          if (!parabolic) {
            if (chordal_distance(z, cycle.points[k]) < rho) {
              result = static_cast<int>(((static_cast<long>(k) - t) % m + m) % m);
              break;
            }
          } else if (in_sector(petals[k], z.value(), rho)) {
            if (petal_holds(map, m, petals[k], z, rho, opts.petal_steps)) {
              result = static_cast<int>(((static_cast<long>(k) - t) % m + m) % m);
            }
            break;
          }
        }
        z = map(z);
      }
      phase[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)] = result;
    }
  }

  // Flood fill each immediate component from its cycle point through cells of
  // the same phase (blocks leaks through pinch points into other components).
  raster.labels.assign(cells, -1);
  std::deque<std::size_t> queue;
  for (std::size_t k = 0; k < np; ++k) {
    const cplx seed_z = parabolic ? petals[k].p + petals[k].axis * (rho * 0.5) : cycle.points[k].value();
    const auto seed = raster.cell_of(seed_z);
    if (!seed) continue;
    const int si = static_cast<int>(*seed % static_cast<std::size_t>(nx));
    const int sj = static_cast<int>(*seed / static_cast<std::size_t>(nx));
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int ii = si + di, jj = sj + dj;
        if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
        const std::size_t c = static_cast<std::size_t>(jj) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ii);
        if (phase[c] == static_cast<int>(k) && raster.labels[c] < 0) {
          raster.labels[c] = static_cast<int>(k);
          queue.push_back(c);
        }
      }
    }
  }
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    const int i = static_cast<int>(c % static_cast<std::size_t>(nx));
    const int j = static_cast<int>(c / static_cast<std::size_t>(nx));
    const int lab = raster.labels[c];
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& q : nb) {
      if (q[0] < 0 || q[1] < 0 || q[0] >= nx || q[1] >= ny) continue;
      const std::size_t n = static_cast<std::size_t>(q[1]) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(q[0]);
      if (raster.labels[n] < 0 && phase[n] == lab) {
        raster.labels[n] = lab;
        queue.push_back(n);
      }
    }
  }
  raster.boundary_cells = compute_boundary_cells(nx, ny, raster.labels);
  return raster;
}

std::vector<SpherePoint> boundary_point_set(const BasinRaster& raster) {
  if (raster.boundary_cells.empty()) throw Error(ErrorKind::EmptyBoundary, "raster has no boundary cells");
  std::vector<SpherePoint> out;
  out.reserve(raster.boundary_cells.size());
  for (std::size_t c : raster.boundary_cells) out.emplace_back(raster.center(c));
  return out;
}

void label_color(int label, unsigned char rgb[3]) {
  static constexpr unsigned char palette[6][3] = {
      {70, 130, 180}, {230, 150, 40}, {90, 170, 90}, {180, 90, 170}, {200, 200, 80}, {80, 190, 200}};
  if (label < 0) {
    rgb[0] = rgb[1] = rgb[2] = 255;
    return;
  }
  const auto& c = palette[static_cast<std::size_t>(label) % 6];
  rgb[0] = c[0];
  rgb[1] = c[1];
  rgb[2] = c[2];
}

void write_basin_ppm(std::ostream& out, const BasinRaster& raster) {
  out << "P6\n" << raster.nx << ' ' << raster.ny << "\n255\n";
  std::vector<unsigned char> px(static_cast<std::size_t>(raster.nx) * static_cast<std::size_t>(raster.ny) * 3);
  for (std::size_t c = 0; c < raster.labels.size(); ++c) label_color(raster.labels[c], &px[3 * c]);
  for (std::size_t c : raster.boundary_cells) px[3 * c] = px[3 * c + 1] = px[3 * c + 2] = 0;
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

void write_boundary_csv(std::ostream& out, const std::vector<SpherePoint>& points) {
  out << "x,y\n";
  for (const auto& p : points) {
    const cplx z = p.value();
    out << fmt::format("{:.17g},{:.17g}\n", z.real(), z.imag());
  }
}

}  // namespace gct
