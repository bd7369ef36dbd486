#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sosnewton/hon.hpp"

namespace sosnewton::xcli {

using linalg::Vec;

// Stable exit codes, also documented in the README.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 2;  // MaxIter or Diverged
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNoInput = 66;

/// Resolves a built-in function name or a path to a polynomial JSON file.
std::optional<jets::FunctionOracle> load_function(const std::string& fn_or_path,
                                                  std::string* error);

struct MinimizeArgs {
  std::string fn;
  Vec x0;
  int d = 3;
  double eps = 0.01;
  std::string method = "hon";  // hon | global | classical
  double grad_tol = 1e-10;
  int max_iter = 100;
  std::optional<double> lipschitz_bound;  // M for the global method
  std::string out = "run";
  std::string sdp_dump;
};
int cmd_minimize(const MinimizeArgs& args, std::ostream& err);

struct RadiusTableArgs {
  std::string fn = "sqrt1";
  std::vector<int> d_list = {2, 3, 4, 5};
  double eps = 0.01;
  double lo = 0.5;
  double hi = 16.0;
  int iters = 200;
  double tol = 1e-9;
  int bisect_steps = 50;
  std::string out = "radius.csv";
  std::string sdp_dump;
};
int cmd_radius_table(const RadiusTableArgs& args, std::ostream& err);

struct BasinArgs {
  std::string fn = "beale";
  double box = 4.0;
  int grid = 41;
  int d = 3;
  double eps = 0.01;
  int max_iter = 350;
  std::string method = "hon";  // hon | classical
  std::optional<Vec> xstar;    // defaults to the oracle's known minimizer
  double label_tol = 1e-4;
  int threads = 0;  // 0 = hardware concurrency
  std::string out = "basin.csv";
  std::string sdp_dump;
};
int cmd_basin(const BasinArgs& args, std::ostream& err);

struct BasinSummary {
  int converged = 0;
  int total = 0;
};
/// Shared worker behind cmd_basin; also used by the acceptance suite.
BasinSummary basin_scan(const jets::FunctionOracle& f, const BasinArgs& args,
                        std::vector<std::string>* labels);

struct VerifyArgs {
  std::string dir;
};
int cmd_verify(const VerifyArgs& args, std::ostream& out);

/// Iteration maps used by the radius table; exposed for tests.
std::function<double(double)> classical_map(const jets::FunctionOracle& f);
std::function<double(double)> closed_form_third_order_map(const jets::FunctionOracle& f);
std::function<double(double)> sdp_step_map(const jets::FunctionOracle& f, int d, double eps,
                                           const sosform::SolveConfig& cfg = {});

}  // namespace sosnewton::xcli
