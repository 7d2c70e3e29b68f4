#include "gctree/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "gctree/error.hpp"

namespace gct {

int poly_degree(std::span<const cplx> p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
    if (p[static_cast<std::size_t>(i)] != cplx(0.0)) return i;
  }
  return -1;
}

cplx poly_eval(std::span<const cplx> p, cplx z) {
  cplx acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void poly_eval_d(std::span<const cplx> p, cplx z, cplx& value, cplx& deriv) {
  value = 0.0;
  deriv = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    deriv = deriv * z + value;
    value = value * z + *it;
  }
}

double poly_scale(std::span<const cplx> p, double abs_z) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * abs_z + std::abs(*it);
  return acc;
}

Poly poly_derivative(std::span<const cplx> p) {
  if (p.size() <= 1) return Poly{0.0};
  Poly d(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<double>(i);
  return d;
}

Poly poly_mul(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.empty() || b.empty()) return Poly{0.0};
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

Poly poly_add(std::span<const cplx> a, std::span<const cplx> b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

Poly poly_scaled(std::span<const cplx> a, cplx s) {
  Poly r(a.begin(), a.end());
  for (auto& c : r) c *= s;
  return r;
}

Poly poly_trimmed(std::span<const cplx> p) {
  const int deg = poly_degree(p);
  if (deg < 0) return Poly{0.0};
  return Poly(p.begin(), p.begin() + deg + 1);
}

Poly poly_from_roots(std::span<const cplx> roots, cplx lead) {
  Poly r{lead};
  for (const cplx& root : roots) {
    const cplx factor[2] = {-root, 1.0};
    r = poly_mul(r, factor);
  }
  return r;
}

bool root_less(const cplx& a, const cplx& b) {
  const auto ka = std::llround(a.real() * 1e9);
  const auto kb = std::llround(b.real() * 1e9);
  if (ka != kb) return ka < kb;
  return a.imag() < b.imag();
}

void sort_roots(std::vector<cplx>& roots) { std::sort(roots.begin(), roots.end(), root_less); }

namespace {

// Two Newton steps, kept only when the residual does not grow.
cplx polish(std::span<const cplx> p, cplx z) {
  for (int i = 0; i < 3; ++i) {
    cplx v, d;
    poly_eval_d(p, z, v, d);
    if (v == cplx(0.0) || d == cplx(0.0)) break;
    const cplx next = z - v / d;
    if (std::abs(poly_eval(p, next)) >= std::abs(v)) break;
    z = next;
  }
  return z;
}

std::vector<cplx> quadratic_roots(cplx c, cplx b, cplx a) {
  const cplx disc = std::sqrt(b * b - 4.0 * a * c);
  // Pick the sign that avoids cancellation in b +/- sqrt(disc).
  const cplx q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
  if (q == cplx(0.0)) return {0.0, 0.0};
  return {q / a, c / q};
}

}  // namespace

std::vector<cplx> poly_roots(std::span<const cplx> coeffs, const RootOptions& opts) {
  const int n = poly_degree(coeffs);
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "poly_roots needs degree >= 1");
  const std::span<const cplx> p = coeffs.first(static_cast<std::size_t>(n) + 1);

  std::vector<cplx> roots;
  if (n == 1) {
    roots.push_back(-p[0] / p[1]);
  } else if (n == 2) {
    roots = quadratic_roots(p[0], p[1], p[2]);
  } else {
    double radius = 0.0;
    for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(p[static_cast<std::size_t>(i)] / p[static_cast<std::size_t>(n)]));
    radius += 1.0;
    roots = aberth_implicit(n, radius, [&](cplx z) {
      cplx v, d;
      poly_eval_d(p, z, v, d);
      if (v == cplx(0.0)) return cplx(0.0);
      if (d == cplx(0.0)) return cplx(1e-3 * (1.0 + std::abs(z)));
      return v / d;
    }, opts.max_iterations);
  }

  double worst = 0.0;
  for (auto& r : roots) {
    r = polish(p, r);
    const double residual = std::abs(poly_eval(p, r));
    const double tol = opts.relative_tolerance * poly_scale(p, std::abs(r));
    if (!std::isfinite(residual) || residual > tol) worst = std::max(worst, residual / std::max(tol, 1e-300));
  }
  if (worst > 0.0) {
    throw Error(ErrorKind::NoConvergence,
                "root residual exceeds tolerance by factor " + std::to_string(worst));
  }
  sort_roots(roots);
  return roots;
}

}  // namespace gct
