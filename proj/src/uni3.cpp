#include "sosnewton/uni3.hpp"

#include <cmath>
#include <stdexcept>

namespace sosnewton::uni3 {

double n2_map(const ScalarDerivs& d, double x_k) {
  if (d.f2 == 0.0) throw std::domain_error("n2_map: zero second derivative");
  return x_k - d.f1 / d.f2;
}

double n3_map(const ScalarDerivs& d, double x_k) {
  if (!(d.f2 > 0.0)) throw std::domain_error("n3_map: requires positive second derivative");
  if (std::fabs(d.f3) <= 1e-12) return x_k - d.f1 / d.f2;
  // The step is x - 2 f2/f3 - cbrt((f1 - (2/3) f2^2/f3) / (f3^2 / (12 f2))),
  // i.e. x + u - v with u = -2 f2/f3 and v^3 = u^3 + 12 f1 f2 / f3^2.
  // Near a stationary point u and v agree to many digits, so the difference
  // is formed as (u^3 - v^3) / (u^2 + uv + v^2); the numerator is exact in
  // the inputs and the denominator is bounded below by (u^2 + v^2)/2.
  const double u = -2.0 * d.f2 / d.f3;
  const double diff_cubes = -12.0 * d.f1 * d.f2 / (d.f3 * d.f3);  // u^3 - v^3
  const double v = std::cbrt(u * u * u - diff_cubes);
  return x_k + diff_cubes / (u * u + u * v + v * v);
}

bool converges_from(const std::function<double(double)>& map, double x0, double xstar, int iters,
                    double tol) {
  double x = x0;
  try {
    for (int k = 0; k < iters; ++k) {
      if (std::fabs(x - xstar) <= tol) return true;
      if (!std::isfinite(x) || std::fabs(x) > 1e12) return false;
      x = map(x);
    }
  } catch (const std::exception&) {
    return false;
  }
  return std::isfinite(x) && std::fabs(x - xstar) <= tol;
}

double basin_radius(const std::function<double(double)>& map, double xstar, double lo, double hi,
                    int iters, double tol, int bisect_steps) {
  if (!converges_from(map, lo, xstar, iters, tol) || converges_from(map, hi, xstar, iters, tol))
    throw std::invalid_argument("basin_radius: predicate not bracketed by [lo, hi]");
  for (int i = 0; i < bisect_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (converges_from(map, mid, xstar, iters, tol))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace sosnewton::uni3
