#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sosnewton/jets.hpp"
#include "sosnewton/sosform.hpp"

namespace sosnewton::hon {

using jets::FunctionOracle;
using linalg::Vec;
using polycore::Polynomial;

enum class Branch { PD, Shifted, Global };

const char* to_string(Branch b);

/// Raised when an SDP subproblem or a certificate check fails inside a step.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepDiagnostics {
  double lambda_min_hess = 0.0;
  double grad_norm_center = 0.0;
  double surrogate_value_gap = 0.0;     // |psi(x_k) - f(x_k)|
  double surrogate_grad_gap = 0.0;      // ||grad psi(x_k) - grad f(x_k)||
  double surrogate_grad_at_next = 0.0;  // ||grad psi(next)||
  double cert_residual = 0.0;
  double cert_min_eig = 0.0;
  double lasserre_gap = 0.0;
  int sdp_iterations_weight = 0;
  int sdp_iterations_minimize = 0;
  bool pd_eig_tiny = false;  // lambda_min in (0, 1e-12], treated as PD but flagged
  bool stalled_nonconvex_stationary = false;
};

struct StepReport {
  Vec center;
  Branch branch = Branch::PD;
  Polynomial taylor;  // original coordinates
  double t_or_tbar = 0.0;
  std::optional<double> eps_used;
  int dprime = 0;
  Polynomial surrogate;  // original coordinates
  Vec next;
  sosform::SosConvexCertificate certificate;  // centered at `center`
  StepDiagnostics diag;
};

enum class Termination { GradTol, MaxIter, SolverFailure, Diverged };

const char* to_string(Termination t);

struct Trace {
  std::vector<Vec> iterates;
  Vec values;
  Vec grad_norms;
  std::vector<StepReport> steps;  // steps[k] maps iterates[k] to iterates[k+1]
  Termination termination = Termination::MaxIter;
  std::string message;
};

struct Options {
  double eps = 0.01;
  double grad_tol = 1e-10;
  int max_iter = 100;
  double divergence_norm = 1e8;
  sosform::SolveConfig solve{};
};

/// One iteration of the order-d method: branch on lambda_min(hess f(x_k)) > 0,
/// regularize the Taylor polynomial into an sos-convex surrogate, minimize it.
StepReport step_order_d(const FunctionOracle& f, const Vec& x_k, int d, double eps,
                        const sosform::SolveConfig& cfg = {});

/// One iteration of the globally convergent odd-order variant with known
/// Lipschitz bound M on grad^d f. Requires a positive definite Hessian.
StepReport step_global(const FunctionOracle& f, const Vec& x_k, int d, double M,
                       const sosform::SolveConfig& cfg = {});

/// x_k - hess^{-1} grad; throws SolverError on a singular Hessian.
Vec classical_newton_step(const FunctionOracle& f, const Vec& x_k);

Trace minimize(const FunctionOracle& f, const Vec& x0, int d, const Options& opts = {});
Trace minimize_global(const FunctionOracle& f, const Vec& x0, int d, double M,
                      const Options& opts = {});
Trace minimize_classical(const FunctionOracle& f, const Vec& x0, const Options& opts = {});

/// Least-squares slope of log||x_{k+1}-x*|| against log||x_k-x*|| over pairs
/// with both errors inside (1e-13, 1e-1); nullopt when fewer than two pairs
/// qualify.
std::optional<double> empirical_order(const Trace& t, const Vec& xstar);

std::string trace_to_csv(const Trace& t);
std::string trace_to_json(const Trace& t, const std::string& function_name, int d,
                          const std::string& method);

}  // namespace sosnewton::hon
