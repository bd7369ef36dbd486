#include "sosnewton/xcli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sosnewton/uni3.hpp"

namespace sosnewton::xcli {

namespace fs = std::filesystem;
using jets::FunctionOracle;
using polycore::MultiIndex;
using polycore::Polynomial;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool write_file(const std::string& path, const std::string& content, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  out << content;
  return true;
}

uni3::ScalarDerivs derivs_at(const FunctionOracle& f, double x, int order) {
  const jets::Jet j = f.jet_at({x}, order);
  uni3::ScalarDerivs d;
  d.f1 = j.coeff(MultiIndex({1}));
  if (order >= 2) d.f2 = 2.0 * j.coeff(MultiIndex({2}));
  if (order >= 3) d.f3 = 6.0 * j.coeff(MultiIndex({3}));
  return d;
}

}  // namespace

std::optional<FunctionOracle> load_function(const std::string& fn_or_path, std::string* error) {
  if (auto builtin = jets::find_builtin(fn_or_path)) return builtin;
  std::ifstream in(fn_or_path);
  if (!in) {
    if (error) *error = "unknown function '" + fn_or_path + "' (not a built-in, not a readable file)";
    return std::nullopt;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    Polynomial p = Polynomial::from_json(buf.str());
    return jets::oracle_from_polynomial(fs::path(fn_or_path).stem().string(), std::move(p));
  } catch (const std::exception& e) {
    if (error) *error = std::string("failed to parse polynomial JSON: ") + e.what();
    return std::nullopt;
  }
}

std::function<double(double)> classical_map(const FunctionOracle& f) {
  return [f](double x) { return uni3::n2_map(derivs_at(f, x, 2), x); };
}

std::function<double(double)> closed_form_third_order_map(const FunctionOracle& f) {
  return [f](double x) { return uni3::n3_map(derivs_at(f, x, 3), x); };
}

std::function<double(double)> sdp_step_map(const FunctionOracle& f, int d, double eps,
                                           const sosform::SolveConfig& cfg) {
  return [f, d, eps, cfg](double x) { return hon::step_order_d(f, {x}, d, eps, cfg).next[0]; };
}

int cmd_minimize(const MinimizeArgs& args, std::ostream& err) {
  std::string lerr;
  auto f = load_function(args.fn, &lerr);
  if (!f) {
    err << "error: " << lerr << "\n";
    return kExitUsage;
  }
  if (static_cast<int>(args.x0.size()) != f->dim) {
    err << "error: x0 has " << args.x0.size() << " component(s), function '" << f->name
        << "' expects " << f->dim << "\n";
    return kExitUsage;
  }
  hon::Options opts;
  opts.eps = args.eps;
  opts.grad_tol = args.grad_tol;
  opts.max_iter = args.max_iter;
  opts.solve.dump_dir = args.sdp_dump;
  if (!args.sdp_dump.empty()) fs::create_directories(args.sdp_dump);

  hon::Trace trace;
  int d_used = args.d;
  std::string method = args.method;
  if (method == "hon" && args.d == 2) method = "classical";  // d=2 is the classical method
  if (method == "hon") {
    if (args.d < 3) {
      err << "error: --d must be >= 2 (d=2 runs the classical method)\n";
      return kExitUsage;
    }
    trace = hon::minimize(*f, args.x0, args.d, opts);
  } else if (method == "global") {
    if (args.d < 3 || args.d % 2 == 0) {
      err << "error: the global method requires odd --d >= 3\n";
      return kExitUsage;
    }
    double M;
    if (args.lipschitz_bound) {
      M = *args.lipschitz_bound;
    } else if (auto it = f->lipschitz.find(args.d); it != f->lipschitz.end()) {
      M = it->second;
    } else {
      err << "error: the global method needs --M (no stored Lipschitz bound for d=" << args.d
          << ")\n";
      return kExitUsage;
    }
    trace = hon::minimize_global(*f, args.x0, args.d, M, opts);
  } else if (method == "classical") {
    d_used = 2;
    trace = hon::minimize_classical(*f, args.x0, opts);
  } else {
    err << "error: unknown method '" << method << "'\n";
    return kExitUsage;
  }

  fs::create_directories(args.out);
  if (!write_file((fs::path(args.out) / "trace.csv").string(), hon::trace_to_csv(trace), err) ||
      !write_file((fs::path(args.out) / "trace.json").string(),
                  hon::trace_to_json(trace, f->name, d_used, args.method), err))
    return kExitSolverFailure;

  switch (trace.termination) {
    case hon::Termination::GradTol: return kExitOk;
    case hon::Termination::MaxIter:
    case hon::Termination::Diverged: return kExitNotConverged;
    case hon::Termination::SolverFailure:
      err << "solver failure: " << trace.message << "\n";
      return kExitSolverFailure;
  }
  return kExitSolverFailure;
}

int cmd_radius_table(const RadiusTableArgs& args, std::ostream& err) {
  std::string lerr;
  auto f = load_function(args.fn, &lerr);
  if (!f) {
    err << "error: " << lerr << "\n";
    return kExitUsage;
  }
  if (f->dim != 1) {
    err << "error: radius-table requires a univariate function\n";
    return kExitUsage;
  }
  if (!f->minimizer) {
    err << "error: function '" << f->name << "' has no known minimizer\n";
    return kExitUsage;
  }
  const double xstar = (*f->minimizer)[0];
  sosform::SolveConfig cfg;
  cfg.dump_dir = args.sdp_dump;
  if (!args.sdp_dump.empty()) fs::create_directories(args.sdp_dump);

  std::ostringstream csv;
  csv << "d,map,radius\n";
  for (int d : args.d_list) {
    try {
      if (d == 2) {
        const double r = uni3::basin_radius(classical_map(*f), xstar, args.lo, args.hi, args.iters,
                                            args.tol, args.bisect_steps);
        csv << "2,classical," << fmt(r) << "\n";
        continue;
      }
      if (d < 3) {
        err << "error: radius-table supports d >= 2\n";
        return kExitUsage;
      }
      const double r = uni3::basin_radius(sdp_step_map(*f, d, args.eps, cfg), xstar, args.lo,
                                          args.hi, args.iters, args.tol, args.bisect_steps);
      csv << d << ",sdp," << fmt(r) << "\n";
      if (d == 3) {
        const double rc = uni3::basin_radius(closed_form_third_order_map(*f), xstar, args.lo,
                                             args.hi, args.iters, args.tol, args.bisect_steps);
        csv << "3,closed-form," << fmt(rc) << "\n";
      }
    } catch (const std::exception& e) {
      err << "error: radius estimation failed for d=" << d << ": " << e.what() << "\n";
      return kExitSolverFailure;
    }
  }
  return write_file(args.out, csv.str(), err) ? kExitOk : kExitSolverFailure;
}

BasinSummary basin_scan(const FunctionOracle& f, const BasinArgs& args,
                        std::vector<std::string>* labels) {
  const int G = args.grid;
  const int dim = f.dim;
  Vec xstar = args.xstar ? *args.xstar : *f.minimizer;
  const size_t total = dim == 1 ? static_cast<size_t>(G) : static_cast<size_t>(G) * G;
  std::vector<char> conv(total, 0);

  auto coord = [&](int i) { return G == 1 ? 0.0 : -args.box + 2.0 * args.box * i / (G - 1); };
  auto classify = [&](size_t idx) {
    Vec x0(dim);
    if (dim == 1) {
      x0[0] = coord(static_cast<int>(idx));
    } else {
      x0[0] = coord(static_cast<int>(idx) / G);
      x0[1] = coord(static_cast<int>(idx) % G);
    }
    hon::Options opts;
    opts.eps = args.eps;
    opts.max_iter = args.max_iter;
    hon::Trace tr;
    if (args.method == "classical")
      tr = hon::minimize_classical(f, x0, opts);
    else
      tr = hon::minimize(f, x0, args.d, opts);
    const Vec& last = tr.iterates.back();
    double dist2 = 0.0;
    for (int v = 0; v < dim; ++v) dist2 += (last[v] - xstar[v]) * (last[v] - xstar[v]);
    return std::sqrt(dist2) <= args.label_tol;
  };

  unsigned nthreads = args.threads > 0 ? args.threads : std::thread::hardware_concurrency();
  nthreads = std::max(1u, std::min<unsigned>(nthreads, total));
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (size_t idx = cursor.fetch_add(1); idx < total; idx = cursor.fetch_add(1))
      conv[idx] = classify(idx) ? 1 : 0;
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  BasinSummary sum;
  sum.total = static_cast<int>(total);
  if (labels) labels->resize(total);
  for (size_t i = 0; i < total; ++i) {
    sum.converged += conv[i];
    if (labels) (*labels)[i] = conv[i] ? "converged-to-xstar" : "other";
  }
  return sum;
}

int cmd_basin(const BasinArgs& args, std::ostream& err) {
  std::string lerr;
  auto f = load_function(args.fn, &lerr);
  if (!f) {
    err << "error: " << lerr << "\n";
    return kExitUsage;
  }
  if (f->dim != 1 && f->dim != 2) {
    err << "error: basin scans support 1- or 2-dimensional functions\n";
    return kExitUsage;
  }
  if (!args.xstar && !f->minimizer) {
    err << "error: no reference minimizer; pass --xstar\n";
    return kExitUsage;
  }
  if (args.xstar && static_cast<int>(args.xstar->size()) != f->dim) {
    err << "error: --xstar dimension mismatch\n";
    return kExitUsage;
  }
  if (args.grid < 1) {
    err << "error: --grid must be positive\n";
    return kExitUsage;
  }
  if (args.method != "hon" && args.method != "classical") {
    err << "error: basin method must be hon or classical\n";
    return kExitUsage;
  }
  if (args.method == "hon" && args.d < 3) {
    err << "error: --d must be >= 3 for the hon method\n";
    return kExitUsage;
  }

  std::vector<std::string> labels;
  basin_scan(*f, args, &labels);

  const int G = args.grid;
  auto coord = [&](int i) { return G == 1 ? 0.0 : -args.box + 2.0 * args.box * i / (G - 1); };
  std::ostringstream csv;
  if (f->dim == 1) {
    csv << "x,label\n";
    for (int i = 0; i < G; ++i) csv << fmt(coord(i)) << "," << labels[i] << "\n";
  } else {
    csv << "x1,x2,label\n";
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j)
        csv << fmt(coord(i)) << "," << fmt(coord(j)) << "," << labels[static_cast<size_t>(i) * G + j]
            << "\n";
  }
  return write_file(args.out, csv.str(), err) ? kExitOk : kExitSolverFailure;
}

namespace {

bool verify_trace_file(const fs::path& path, std::ostream& out, int& steps_checked) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str());
  bool all_ok = true;
  int k = 0;
  for (const auto& js : j.at("steps")) {
    sosform::SosConvexCertificate cert;
    cert.polynomial = Polynomial::from_json(js.at("certificate").at("polynomial").dump());
    cert.gramform.target = Polynomial::from_json(js.at("certificate").at("target").dump());
    cert.min_eig = js.at("certificate").at("min_eig").get<double>();
    for (const auto& be : js.at("certificate").at("basis")) {
      sosform::GramBasisElem e;
      e.mono = MultiIndex(be.at("exp").get<std::vector<int>>());
      e.ycoord = be.at("y").get<int>();
      cert.gramform.basis.push_back(std::move(e));
    }
    const auto& gram = js.at("certificate").at("gram");
    const int N = static_cast<int>(gram.size());
    cert.gramform.gram = linalg::Mat(N, N);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) cert.gramform.gram(r, c) = gram[r][c].get<double>();

    const sosform::VerifyReport rep = sosform::verify_certificate(cert);
    const Polynomial surrogate = Polynomial::from_json(js.at("surrogate").dump());
    const Vec next = js.at("next").get<Vec>();
    const double stat = linalg::norm2(surrogate.eval_grad(next));
    const double scale = std::max(1.0, surrogate.max_abs_coeff());
    const bool stat_ok = stat <= 1e-7 * scale;
    const bool ok = rep.ok && stat_ok;
    out << (ok ? "pass" : "FAIL") << " " << path.string() << " step " << k << " residual "
        << rep.residual << " min_eig " << rep.min_eig << " stationarity " << stat << "\n";
    all_ok = all_ok && ok;
    ++k;
    ++steps_checked;
  }
  return all_ok;
}

}  // namespace

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
  if (!fs::exists(args.dir) || !fs::is_directory(args.dir)) {
    out << "error: no artifacts directory at '" << args.dir << "'\n";
    return kExitNoInput;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(args.dir))
    if (entry.is_regular_file() && entry.path().filename() == "trace.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    out << "error: no trace.json artifacts under '" << args.dir << "'\n";
    return kExitNoInput;
  }
  bool all_ok = true;
  int steps = 0;
  for (const auto& p : files) {
    try {
      all_ok = verify_trace_file(p, out, steps) && all_ok;
    } catch (const std::exception& e) {
      out << "FAIL " << p.string() << " corrupt: " << e.what() << "\n";
      all_ok = false;
    }
  }
  out << (all_ok ? "verified " : "verification FAILED, checked ") << steps << " step(s) in "
      << files.size() << " trace(s)\n";
  return all_ok ? kExitOk : 1;
}

}  // namespace sosnewton::xcli
