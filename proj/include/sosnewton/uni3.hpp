#pragma once

#include <functional>

namespace sosnewton::uni3 {

/// First three derivatives of a univariate function at a point.
struct ScalarDerivs {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

/// Classical Newton step x - f'/f''. Throws std::domain_error when f'' == 0.
double n2_map(const ScalarDerivs& d, double x_k);

/// Third-order step
///   x - 2 f''/f''' - cbrt( (f' - (2/3) f''^2/f''') / (f'''^2 / (12 f'')) ),
/// real cube root. Requires f'' > 0; falls back to the classical step when
/// |f'''| <= 1e-12 (the two methods coincide for a convex cubic-free Taylor).
double n3_map(const ScalarDerivs& d, double x_k);

/// Bisection (default 50 steps) on the predicate "iterating `map` from x0
/// enters the tol-ball around xstar within `iters` steps". The caller must
/// bracket: the predicate holds at lo and fails at hi. Exceptions and
/// non-finite iterates count as failure to converge.
double basin_radius(const std::function<double(double)>& map, double xstar, double lo, double hi,
                    int iters = 200, double tol = 1e-9, int bisect_steps = 50);

/// The convergence predicate used by basin_radius, exposed for reuse.
bool converges_from(const std::function<double(double)>& map, double x0, double xstar, int iters,
                    double tol);

}  // namespace sosnewton::uni3
