#include "gctree/rational_map.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "gctree/error.hpp"

namespace gct {

namespace {

// Evaluates sum p_i w^(deg - i), the coefficient reversal used in the 1/z chart.
cplx eval_reversed(const Poly& p, int deg, cplx w) {
  cplx acc = 0.0;
  for (int i = 0; i <= deg; ++i) acc = acc * w + p[static_cast<std::size_t>(i)];
  return acc;
}

cplx int_pow(cplx w, int k) {
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= w;
  return r;
}

}  // namespace

RationalMap::RationalMap(Poly numerator, Poly denominator)
    : num_(poly_trimmed(numerator)), den_(poly_trimmed(denominator)) {
  num_deg_ = poly_degree(num_);
  den_deg_ = poly_degree(den_);
  if (den_deg_ < 0) throw Error(ErrorKind::InvalidArgument, "denominator is the zero polynomial");
  if (num_deg_ < 0) throw Error(ErrorKind::InvalidArgument, "numerator is the zero polynomial");
  degree_ = std::max(num_deg_, den_deg_);
  if (degree_ < 2) throw Error(ErrorKind::InvalidArgument, "map degree must be at least 2");
  for (const auto& c : num_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
  }
  for (const auto& c : den_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
  }
  if (num_deg_ >= 1 && den_deg_ >= 1) {
    const bool num_smaller = num_deg_ <= den_deg_;
    const Poly& a = num_smaller ? num_ : den_;
    const Poly& b = num_smaller ? den_ : num_;
    for (const cplx& r : poly_roots(a)) {
      const double scale = poly_scale(b, std::abs(r));
      if (std::abs(poly_eval(b, r)) <= 1e-9 * scale) {
        throw Error(ErrorKind::InvalidArgument, "numerator and denominator share a root");
      }
    }
  }
}

namespace {

// Quotients that overflow are the point at infinity.
SpherePoint finite_or_infinity(cplx v) {
  if (std::isfinite(v.real()) && std::isfinite(v.imag())) return SpherePoint(v);
  return SpherePoint::infinity();
}

}  // namespace

SpherePoint RationalMap::operator()(const SpherePoint& z) const {
  if (z.is_finite() && z.norm2() <= 4.0) {
    const cplx v = z.value();
    const cplx q = poly_eval(den_, v);
    if (q == cplx(0.0)) return SpherePoint::infinity();
    return SpherePoint(poly_eval(num_, v) / q);
  }
  const cplx w = z.inverted();
  const cplx pr = eval_reversed(num_, num_deg_, w);
  const cplx qr = eval_reversed(den_, den_deg_, w);
  const int k = den_deg_ - num_deg_;
  if (k >= 0) {
    if (qr == cplx(0.0)) return SpherePoint::infinity();
    return finite_or_infinity(int_pow(w, k) * pr / qr);
  }
  const cplx den = qr * int_pow(w, -k);
  if (den == cplx(0.0)) return SpherePoint::infinity();
  return finite_or_infinity(pr / den);
}

cplx RationalMap::derivative(const SpherePoint& z) const {
  if (z.is_infinite()) throw Error(ErrorKind::ChartRequired, "derivative at infinity");
  const cplx v = z.value();
  cplx p, dp, q, dq;
  poly_eval_d(num_, v, p, dp);
  poly_eval_d(den_, v, q, dq);
  if (q == cplx(0.0)) throw Error(ErrorKind::ChartRequired, "derivative at a pole");
  const cplx r = (dp * q - p * dq) / (q * q);
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) throw Error(ErrorKind::ChartRequired, "derivative overflow near a pole");
  return r;
}

double RationalMap::spherical_derivative(const SpherePoint& z) const {
  if (z.is_infinite()) throw Error(ErrorKind::ChartRequired, "spherical derivative at infinity");
  const cplx v = z.value();
  cplx p, dp, q, dq;
  poly_eval_d(num_, v, p, dp);
  poly_eval_d(den_, v, q, dq);
  const double zfac = 1.0 + std::norm(v);
  if (std::abs(p) <= std::abs(q)) {
    const cplx f = p / q;
    const cplx df = (dp * q - p * dq) / (q * q);
    return std::abs(df) * zfac / (1.0 + std::norm(f));
  }
  // |f| > 1: use 1/f, which has the same spherical derivative.
  const cplx g = q / p;
  const cplx dg = (dq * p - q * dp) / (p * p);
  return std::abs(dg) * zfac / (1.0 + std::norm(g));
}

RationalMap RationalMap::compose(const RationalMap& g) const {
  const int d = degree_;
  std::vector<Poly> npow{Poly{1.0}};
  std::vector<Poly> dpow{Poly{1.0}};
  for (int i = 1; i <= d; ++i) {
    npow.push_back(poly_mul(npow.back(), g.num_));
    dpow.push_back(poly_mul(dpow.back(), g.den_));
  }
  auto homogenize = [&](const Poly& coeffs) {
    Poly acc{0.0};
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const Poly term = poly_mul(npow[i], dpow[static_cast<std::size_t>(d) - i]);
      acc = poly_add(acc, poly_scaled(term, coeffs[i]));
    }
    return acc;
  };
  return RationalMap(homogenize(num_), homogenize(den_));
}

RationalMap RationalMap::iterate(int m) const {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "iterate count must be >= 1");
  RationalMap r = *this;
  for (int i = 1; i < m; ++i) r = compose(r);
  return r;
}

std::uint64_t RationalMap::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& c : num_) { mix(c.real()); mix(c.imag()); }
  mix(1e300);
  for (const auto& c : den_) { mix(c.real()); mix(c.imag()); }
  return h;
}

std::string RationalMap::to_string() const {
  std::ostringstream os;
  os.precision(17);
  auto dump = [&](const Poly& p) {
    os << '[';
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << ", ";
      os << '(' << p[i].real() << ',' << p[i].imag() << ')';
    }
    os << ']';
  };
  dump(num_);
  os << " / ";
  dump(den_);
  return os.str();
}

SpherePoint eval_map(const RationalMap& map, const SpherePoint& z) { return map(z); }

cplx eval_derivative(const RationalMap& map, const SpherePoint& z) { return map.derivative(z); }

SpherePoint iterate_point(const RationalMap& map, SpherePoint z, int n) {
  for (int i = 0; i < n; ++i) z = map(z);
  return z;
}

namespace {

bool use_inverse_chart(const SpherePoint& z) { return z.is_infinite() || z.norm2() > 1.0; }

// Derivative of the local expression u -> chart_out(f(chart_in^{-1}(u))).
cplx chart_derivative(const RationalMap& map, const SpherePoint& z, bool in_inv, bool out_inv) {
  const Poly& P = map.numerator();
  const Poly& Q = map.denominator();
  if (z.is_finite()) {
    const cplx v = z.value();
    cplx p, dp, q, dq;
    poly_eval_d(P, v, p, dp);
    poly_eval_d(Q, v, q, dq);
    // F = f or 1/f depending on the output chart.
    const cplx dF = out_inv ? (dq * p - q * dp) / (p * p) : (dp * q - p * dq) / (q * q);
    return in_inv ? -dF * v * v : dF;
  }
  // z = infinity in the 1/z chart: f(1/u) = u^k A(u)/B(u).
  const int dp = poly_degree(P);
  const int dq = poly_degree(Q);
  const Poly& A = out_inv ? Q : P;
  const Poly& B = out_inv ? P : Q;
  const int da = out_inv ? dq : dp;
  const int db = out_inv ? dp : dq;
  const int k = db - da;
  const cplx a0 = A[static_cast<std::size_t>(da)];
  const cplx b0 = B[static_cast<std::size_t>(db)];
  if (k >= 2) return 0.0;
  if (k == 1) return a0 / b0;
  if (k < 0) throw Error(ErrorKind::ChartRequired, "inconsistent chart choice at infinity");
  const cplx a1 = da >= 1 ? A[static_cast<std::size_t>(da - 1)] : cplx(0.0);
  const cplx b1 = db >= 1 ? B[static_cast<std::size_t>(db - 1)] : cplx(0.0);
  return (a1 * b0 - a0 * b1) / (b0 * b0);
}

}  // namespace

cplx cycle_multiplier(const RationalMap& map, std::span<const SpherePoint> cycle) {
  if (cycle.empty()) throw Error(ErrorKind::InvalidArgument, "empty cycle");
  bool plain = true;
  for (const auto& z : cycle) {
    if (z.is_infinite() || map(z).is_infinite()) plain = false;
  }
  cplx m = 1.0;
  if (plain) {
    for (const auto& z : cycle) m *= map.derivative(z);
    return m;
  }
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const SpherePoint& z = cycle[i];
    const SpherePoint& next = cycle[(i + 1) % cycle.size()];
    m *= chart_derivative(map, z, use_inverse_chart(z), use_inverse_chart(next));
  }
  return m;
}

std::vector<SpherePoint> CriticalData::postcritical_closure() const {
  std::vector<SpherePoint> all;
  for (const auto& orbit : orbits) all.insert(all.end(), orbit.begin(), orbit.end());
  for (const auto& cycle : limit_cycles) all.insert(all.end(), cycle.begin(), cycle.end());
  return all;
}

namespace {

// Newton for f^q(z) = z from `start`; empty on failure.
std::optional<SpherePoint> newton_cycle(const RationalMap& map, SpherePoint start, int q) {
  if (start.is_infinite()) return std::nullopt;
  cplx z = start.value();
  for (int it = 0; it < 200; ++it) {
    SpherePoint w(z);
    cplx d = 1.0;
    try {
      for (int i = 0; i < q; ++i) {
        d *= map.derivative(w);
        w = map(w);
      }
    } catch (const Error&) {
      return std::nullopt;
    }
    if (w.is_infinite()) return std::nullopt;
    const cplx residual = w.value() - z;
    if (std::abs(residual) <= 1e-14 * (1.0 + std::abs(z))) return SpherePoint(z);
    if (d == cplx(1.0)) return std::nullopt;
    z -= residual / (d - 1.0);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
  }
  // Parabolic cycles converge only linearly; accept a small final residual.
  SpherePoint w = iterate_point(map, SpherePoint(z), q);
  if (w.is_finite() && std::abs(w.value() - z) <= 1e-12 * (1.0 + std::abs(z))) return SpherePoint(z);
  return std::nullopt;
}

}  // namespace

CriticalData critical_points(const RationalMap& map, int K) {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "K must be >= 1");
  const Poly& P = map.numerator();
  const Poly& Q = map.denominator();
  const Poly W = poly_trimmed(poly_add(poly_mul(poly_derivative(P), Q), poly_scaled(poly_mul(P, poly_derivative(Q)), -1.0)));
  const int expected = 2 * map.degree() - 2;

  CriticalData data;
  int found = 0;
  if (poly_degree(W) >= 1) {
    const auto roots = poly_roots(W);
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (used[i]) continue;
      cplx sum = roots[i];
      int mult = 1;
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        if (!used[j] && std::abs(roots[j] - roots[i]) <= 1e-6 * (1.0 + std::abs(roots[i]))) {
          used[j] = true;
          sum += roots[j];
          ++mult;
        }
      }
      data.points.emplace_back(sum / static_cast<double>(mult));
      data.multiplicity.push_back(mult);
      found += mult;
    }
  }
  if (found < expected) {
    data.points.push_back(SpherePoint::infinity());
    data.multiplicity.push_back(expected - found);
  }

  std::vector<bool> exact_cycle(data.points.size(), false);
  for (std::size_t c = 0; c < data.points.size(); ++c) {
    std::vector<SpherePoint> orbit{data.points[c]};
    while (static_cast<int>(orbit.size()) < K) {
      const SpherePoint next = map(orbit.back());
      const bool repeats = std::any_of(orbit.begin(), orbit.end(), [&](const SpherePoint& p) {
        return chordal_distance(p, next) <= 1e-12;
      });
      if (repeats) {
        exact_cycle[c] = true;
        break;
      }
      orbit.push_back(next);
    }
    data.orbits.push_back(std::move(orbit));
  }

  auto known = [&](const SpherePoint& z) {
    for (const auto& cycle : data.limit_cycles) {
      for (const auto& p : cycle) {
        if (chordal_distance(p, z) <= 1e-9) return true;
      }
    }
    return false;
  };
  for (std::size_t c = 0; c < data.orbits.size(); ++c) {
    if (exact_cycle[c]) continue;
    const SpherePoint last = data.orbits[c].back();
    for (int q = 1; q <= 6; ++q) {
      const auto root = newton_cycle(map, last, q);
      if (!root || chordal_distance(*root, last) > 0.1) continue;
      std::vector<SpherePoint> cycle{*root};
      for (int i = 1; i < q; ++i) cycle.push_back(map(cycle.back()));
      cplx m;
      try {
        m = cycle_multiplier(map, cycle);
      } catch (const Error&) {
        continue;
      }
      if (std::abs(m) > 1.0 + 1e-6) continue;
      if (!known(*root)) data.limit_cycles.push_back(std::move(cycle));
      break;
    }
  }
  return data;
}

}  // namespace gct
