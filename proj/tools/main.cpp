#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sosnewton/xcli.hpp"

namespace {

using sosnewton::xcli::kExitUsage;

// --config <file>: JSON object whose keys mirror the long option names of the
// chosen subcommand; command-line flags override config values.
nlohmann::json load_config(int argc, char** argv, std::string& error) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        error = std::string("cannot open config file ") + argv[i + 1];
        return {};
      }
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        return nlohmann::json::parse(buf.str());
      } catch (const std::exception& e) {
        error = std::string("bad config JSON: ") + e.what();
        return {};
      }
    }
  }
  return nlohmann::json::object();
}

// Keys are shared across subcommands ("d" is a scalar for minimize and a
// list for radius-table), so a shape mismatch just leaves the default alone.
template <typename T>
void cfg_get(const nlohmann::json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
  }
}

void cfg_get(const nlohmann::json& j, const char* key, std::vector<int>& target) {
  if (!j.contains(key)) return;
  try {
    if (j.at(key).is_number()) {
      target = {j.at(key).get<int>()};
    } else {
      target = j.at(key).get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception&) {
  }
}

void cfg_get_opt(const nlohmann::json& j, const char* key, std::optional<double>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<double>();
}

void cfg_get_opt_vec(const nlohmann::json& j, const char* key,
                     std::optional<std::vector<double>>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<std::vector<double>>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semidefinite-programming-based higher-order Newton methods"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file mirroring the subcommand flags");

  std::string cfg_error;
  const nlohmann::json cfg = load_config(argc, argv, cfg_error);
  if (!cfg_error.empty()) {
    std::cerr << "error: " << cfg_error << "\n";
    return kExitUsage;
  }

  sosnewton::xcli::MinimizeArgs margs;
  cfg_get(cfg, "fn", margs.fn);
  cfg_get(cfg, "x0", margs.x0);
  cfg_get(cfg, "d", margs.d);
  cfg_get(cfg, "eps", margs.eps);
  cfg_get(cfg, "method", margs.method);
  cfg_get(cfg, "grad-tol", margs.grad_tol);
  cfg_get(cfg, "max-iter", margs.max_iter);
  cfg_get_opt(cfg, "M", margs.lipschitz_bound);
  cfg_get(cfg, "out", margs.out);
  cfg_get(cfg, "sdp-dump", margs.sdp_dump);
  auto* minimize = app.add_subcommand("minimize", "run one of the minimization methods");
  minimize->add_option("--config", config_path, "JSON config file mirroring these flags");
  minimize->add_option("--fn", margs.fn, "built-in name (sqrt1, atan1, beale) or polynomial JSON path");
  minimize->add_option("--x0", margs.x0, "initial point, comma separated")->delimiter(',');
  minimize->add_option("--d", margs.d, "Taylor expansion order (>= 3 for hon/global)");
  minimize->add_option("--eps", margs.eps, "shift parameter for the non-PD branch");
  minimize->add_option("--method", margs.method, "hon | global | classical");
  minimize->add_option("--grad-tol", margs.grad_tol, "gradient-norm stopping tolerance");
  minimize->add_option("--max-iter", margs.max_iter, "iteration cap");
  double m_value = 0.0;
  auto* mopt = minimize->add_option("--M", m_value, "Lipschitz bound on grad^d f (global method)");
  minimize->add_option("--out", margs.out, "output directory for trace.csv / trace.json");
  minimize->add_option("--sdp-dump", margs.sdp_dump, "directory for SDP problem dumps");

  sosnewton::xcli::RadiusTableArgs rargs;
  cfg_get(cfg, "fn", rargs.fn);
  cfg_get(cfg, "d", rargs.d_list);
  cfg_get(cfg, "eps", rargs.eps);
  cfg_get(cfg, "lo", rargs.lo);
  cfg_get(cfg, "hi", rargs.hi);
  cfg_get(cfg, "iters", rargs.iters);
  cfg_get(cfg, "tol", rargs.tol);
  cfg_get(cfg, "bisect-steps", rargs.bisect_steps);
  cfg_get(cfg, "out", rargs.out);
  cfg_get(cfg, "sdp-dump", rargs.sdp_dump);
  auto* radius = app.add_subcommand("radius-table", "estimate basin radii per expansion order");
  radius->add_option("--config", config_path, "JSON config file mirroring these flags");
  radius->add_option("--fn", rargs.fn, "univariate built-in or polynomial JSON path");
  radius->add_option("--d", rargs.d_list, "orders, comma separated")->delimiter(',');
  radius->add_option("--eps", rargs.eps, "shift parameter");
  radius->add_option("--lo", rargs.lo, "bracket: converging initial point");
  radius->add_option("--hi", rargs.hi, "bracket: non-converging initial point");
  radius->add_option("--iters", rargs.iters, "iterations per convergence probe");
  radius->add_option("--tol", rargs.tol, "convergence ball radius");
  radius->add_option("--bisect-steps", rargs.bisect_steps, "bisection steps");
  radius->add_option("--out", rargs.out, "output CSV path");
  radius->add_option("--sdp-dump", rargs.sdp_dump, "directory for SDP problem dumps");

  sosnewton::xcli::BasinArgs bargs;
  cfg_get(cfg, "fn", bargs.fn);
  cfg_get(cfg, "box", bargs.box);
  cfg_get(cfg, "grid", bargs.grid);
  cfg_get(cfg, "d", bargs.d);
  cfg_get(cfg, "eps", bargs.eps);
  cfg_get(cfg, "max-iter", bargs.max_iter);
  cfg_get(cfg, "method", bargs.method);
  cfg_get_opt_vec(cfg, "xstar", bargs.xstar);
  cfg_get(cfg, "label-tol", bargs.label_tol);
  cfg_get(cfg, "threads", bargs.threads);
  cfg_get(cfg, "out", bargs.out);
  cfg_get(cfg, "sdp-dump", bargs.sdp_dump);
  auto* basin = app.add_subcommand("basin", "classify convergence on a grid of initial points");
  basin->add_option("--config", config_path, "JSON config file mirroring these flags");
  basin->add_option("--fn", bargs.fn, "built-in or polynomial JSON path (dim 1 or 2)");
  basin->add_option("--box", bargs.box, "half-width of the scan box");
  basin->add_option("--grid", bargs.grid, "points per axis");
  basin->add_option("--d", bargs.d, "expansion order for the hon method");
  basin->add_option("--eps", bargs.eps, "shift parameter");
  basin->add_option("--max-iter", bargs.max_iter, "iterations per initial point");
  basin->add_option("--method", bargs.method, "hon | classical");
  std::vector<double> xstar_flag;
  auto* xstar_opt = basin->add_option("--xstar", xstar_flag, "reference minimizer")->delimiter(',');
  basin->add_option("--label-tol", bargs.label_tol, "distance defining converged-to-xstar");
  basin->add_option("--threads", bargs.threads, "worker threads (0 = hardware)");
  basin->add_option("--out", bargs.out, "output CSV path");
  basin->add_option("--sdp-dump", bargs.sdp_dump, "directory for SDP problem dumps");

  sosnewton::xcli::VerifyArgs vargs;
  cfg_get(cfg, "dir", vargs.dir);
  auto* verify = app.add_subcommand("verify", "re-check certificates stored in run artifacts");
  verify->add_option("--config", config_path, "JSON config file mirroring these flags");
  verify->add_option("--dir", vargs.dir, "artifacts directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (minimize->parsed()) {
    if (mopt->count() > 0) margs.lipschitz_bound = m_value;
    return sosnewton::xcli::cmd_minimize(margs, std::cerr);
  }
  if (radius->parsed()) return sosnewton::xcli::cmd_radius_table(rargs, std::cerr);
  if (basin->parsed()) {
    if (xstar_opt->count() > 0) bargs.xstar = xstar_flag;
    return sosnewton::xcli::cmd_basin(bargs, std::cerr);
  }
  if (verify->parsed()) return sosnewton::xcli::cmd_verify(vargs, std::cout);
  return kExitUsage;
}
