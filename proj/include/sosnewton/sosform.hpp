#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sosnewton/conicsolve.hpp"
#include "sosnewton/polycore.hpp"

namespace sosnewton::sosform {

using linalg::Mat;
using linalg::Vec;
using polycore::MultiIndex;
using polycore::Polynomial;

/// One element of a Gram basis: a monomial in x, optionally paired with a
/// y coordinate (Kronecker basis phi(x) (x) y used for sos-convexity).
struct GramBasisElem {
  MultiIndex mono;
  int ycoord = -1;  // -1 for a plain sos basis
};

/// Gram representation target = basis^T Q basis. For the Kronecker case the
/// target lives in 2n variables: x_0..x_{n-1}, y_0..y_{n-1}.
struct GramForm {
  std::vector<GramBasisElem> basis;
  Mat gram;
  Polynomial target;
};

struct SosConvexCertificate {
  Polynomial polynomial;  // the certified polynomial (centered at the iterate)
  GramForm gramform;      // for y^T hess(polynomial) y in the Kronecker basis
  double min_eig = 0.0;
};

/// Affine constraint system over a symmetric Gram variable: one equation per
/// reachable monomial, each listing the unordered basis pairs whose products
/// contribute to that monomial.
struct SosSystem {
  struct Equation {
    MultiIndex key;  // monomial in the target's variable space
    std::vector<std::array<int, 2>> pairs;
  };
  std::vector<GramBasisElem> basis;
  std::vector<Equation> equations;
  int target_dim = 0;
};

/// System for "p is sos": basis = monomials of degree <= deg(p)/2.
/// Feasibility of {equations matched to p, Q psd} is equivalent to p sos.
SosSystem build_sos_constraint(const Polynomial& p);

/// System for "p is sos-convex" over the Kronecker basis phi_{deg/2-1}(x) (x) y,
/// matching the biform y^T hess(p) y. Also usable for any polynomial of the
/// same dimension and degree (the system depends only on dim and degree).
SosSystem build_sosconvex_constraint(const Polynomial& p);
SosSystem build_sosconvex_system(int n, int degree);

/// y^T hess(p) y as a polynomial in 2n variables (x first, then y).
Polynomial hessian_biform(const Polynomial& p);

// Tighter than the solver's general default: the Gram programs here are
// tiny and the optimal weight is quoted to 1e-6 relative.
inline conicsolve::SdpOptions default_sdp_options() {
  conicsolve::SdpOptions o;
  o.tol = 1e-9;
  return o;
}

struct SolveConfig {
  conicsolve::SdpOptions sdp = default_sdp_options();
  std::string dump_dir;  // when nonempty, each SDP is dumped here as text
};

struct FeasibilityResult {
  bool feasible = false;
  bool decided = false;  // false when the solver could not classify
  GramForm gram;
  conicsolve::SdpSolution raw;
};

FeasibilityResult check_sos(const Polynomial& p, const SolveConfig& cfg = {});
FeasibilityResult check_sosconvex(const Polynomial& p, const SolveConfig& cfg = {});

enum class MinTOutcome { Ok, Infeasible, SolverFailure };

struct MinTResult {
  MinTOutcome outcome = MinTOutcome::SolverFailure;
  double t_star = 0.0;
  SosConvexCertificate certificate;
  Polynomial surrogate_centered;  // includes the quadratic shift for the bar variant
  conicsolve::SdpSolution raw;
  std::string message;
};

/// Smallest t >= 0 with T + t*||x - center||^dprime sos-convex (one SDP).
MinTResult min_t(const Polynomial& T, const Vec& center, int dprime, const SolveConfig& cfg = {});
/// Same, with T already centered at the origin.
MinTResult min_t_centered(const Polynomial& T_centered, int dprime, const SolveConfig& cfg = {});

/// Smallest tbar >= 0 with
///   T + (eps - lam_min)/2 * ||x-center||^2 + tbar*||x-center||^dprime
/// sos-convex; feasible for every eps > 0.
MinTResult min_t_bar(const Polynomial& T, const Vec& center, double eps, double lam_min,
                     int dprime, const SolveConfig& cfg = {});
MinTResult min_t_bar_centered(const Polynomial& T_centered, double eps, double lam_min,
                              int dprime, const SolveConfig& cfg = {});

struct LasserreSolution {
  bool ok = false;
  double gamma_star = 0.0;
  Vec minimizer;       // degree-1 moments of the dual moment matrix
  Mat moment_matrix;   // indexed by monomial_basis(n, deg/2)
  double stationarity = 0.0;  // ||grad psi(minimizer)||
  double gap = 0.0;           // psi(minimizer) - gamma_star
  conicsolve::SdpSolution raw;
  std::string message;
};

/// sup gamma s.t. psi - gamma sos, with the minimizer read off the degree-1
/// moments of the dual solution. psi must be sos-convex (caller guarantees).
LasserreSolution lasserre_minimize(const Polynomial& psi, const SolveConfig& cfg = {});

struct VerifyReport {
  bool ok = false;
  double residual = 0.0;  // coefficient infinity-norm, relative
  double min_eig = 0.0;
};

VerifyReport verify_certificate(const GramForm& g);
VerifyReport verify_certificate(const SosConvexCertificate& c);

// Certificate tolerances: coefficient residual (relative) and Gram eigenvalue floor.
inline constexpr double kCertResidualTol = 1e-6;
inline constexpr double kCertEigFloor = -1e-7;

}  // namespace sosnewton::sosform
