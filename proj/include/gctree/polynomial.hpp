#pragma once

#include <span>
#include <vector>

#include "gctree/sphere.hpp"

namespace gct {

/// Coefficients in ascending degree order.
using Poly = std::vector<cplx>;

/// Degree ignoring exactly-zero top coefficients; -1 for the zero polynomial.
int poly_degree(std::span<const cplx> p);
cplx poly_eval(std::span<const cplx> p, cplx z);
/// Value and first derivative by Horner's scheme.
void poly_eval_d(std::span<const cplx> p, cplx z, cplx& value, cplx& deriv);
/// Sum |a_i| |z|^i, the natural scale for residuals at z.
double poly_scale(std::span<const cplx> p, double abs_z);

Poly poly_derivative(std::span<const cplx> p);
Poly poly_mul(std::span<const cplx> a, std::span<const cplx> b);
Poly poly_add(std::span<const cplx> a, std::span<const cplx> b);
Poly poly_scaled(std::span<const cplx> a, cplx s);
Poly poly_trimmed(std::span<const cplx> p);
/// Expand prod (z - r_i) times `lead`.
Poly poly_from_roots(std::span<const cplx> roots, cplx lead = 1.0);

struct RootOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-12;
};

/// All complex roots with multiplicity, sorted by real part then imaginary
/// part (real parts compared on a 1e-9 grid so conjugate pairs order stably).
/// Aberth iteration from a circle of radius 1 + max|a_i/a_n|, then Newton polish.
/// Throws NoConvergence when a residual stays above the tolerance.
std::vector<cplx> poly_roots(std::span<const cplx> coeffs, const RootOptions& opts = {});

/// Roots of an implicitly given polynomial of known degree, where `newton`
/// returns p(z)/p'(z). Used when expanding coefficients is ill conditioned.
template <class NewtonRatio>
std::vector<cplx> aberth_implicit(int degree, double start_radius, NewtonRatio newton, int max_iterations = 800);

/// Real part on a 1e-9 grid, then imaginary part.
bool root_less(const cplx& a, const cplx& b);
void sort_roots(std::vector<cplx>& roots);

}  // namespace gct

#include "gctree/polynomial_impl.hpp"
