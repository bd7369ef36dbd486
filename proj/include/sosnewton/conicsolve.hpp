#pragma once

#include <string>
#include <vector>

#include "sosnewton/linalg.hpp"

namespace sosnewton::conicsolve {

using linalg::Mat;
using linalg::Vec;

/// One entry of a symmetric block matrix; row <= col, the mirrored entry is
/// implied. <A, X> therefore counts off-diagonal entries twice.
struct BlockEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SdpConstraint {
  std::vector<BlockEntry> entries;
  double rhs = 0.0;
};

/// Block-diagonal standard-form SDP:
///   minimize    sum_b <C_b, X_b>
///   subject to  sum_b <A_{i,b}, X_b> = b_i,   X_b >= 0.
struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<BlockEntry> objective;
  std::vector<SdpConstraint> constraints;
};

enum class SdpStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalFailure };

const char* to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<Mat> X;  // per-block primal matrices
  std::vector<Mat> S;  // per-block dual slacks
  Vec y;               // dual multipliers, indexed like the original constraints
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double primal_res = 0.0;  // ||b - A(X)|| / (1 + ||b||)
  double dual_res = 0.0;    // ||C - S - A^T(y)||_F / (1 + ||C||_F)
  double rel_gap = 0.0;
  int iterations = 0;
  Vec infeasibility_ray;  // normalized dual improving ray when PrimalInfeasible
  std::string message;
};

struct SdpOptions {
  double tol = 1e-8;          // feasibility and relative-gap target
  int max_iterations = 200;
  double step_fraction = 0.98;
  std::string dump_path;      // when nonempty, the presolved problem is written here
  bool verbose = false;       // per-iteration progress on stderr
};

struct PresolveReport {
  std::vector<int> dropped_rows;   // indices into the original constraint list
  Vec row_scales;                  // Frobenius scale applied to each kept row
  bool infeasible = false;         // inconsistent dependent/zero row found
  std::string note;
};

/// Drops numerically dependent constraint rows (modified Gram-Schmidt with a
/// 1e-10 relative threshold) and scales kept rows to unit Frobenius norm.
/// Inconsistent dependent rows flag the problem primal infeasible.
SdpProblem presolve(const SdpProblem& p, PresolveReport& report);

/// Primal-dual path-following solve (Mehrotra predictor-corrector with
/// Nesterov-Todd scaling, dense Schur complement). Deterministic.
SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

/// Sparse block text format, for cross-checking against external solvers.
std::string to_text(const SdpProblem& p);
SdpProblem from_text(const std::string& text);
void write_text_file(const SdpProblem& p, const std::string& path);

}  // namespace sosnewton::conicsolve
