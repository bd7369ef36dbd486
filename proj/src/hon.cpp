#include "sosnewton/hon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace sosnewton::hon {

using jets::Jet;
using polycore::MultiIndex;

const char* to_string(Branch b) {
  switch (b) {
    case Branch::PD: return "PD";
    case Branch::Shifted: return "Shifted";
    case Branch::Global: return "Global";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::GradTol: return "GradTol";
    case Termination::MaxIter: return "MaxIter";
    case Termination::SolverFailure: return "SolverFailure";
    case Termination::Diverged: return "Diverged";
  }
  return "?";
}

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

Vec negated(const Vec& a) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

Vec plus(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

void fill_common_diagnostics(StepReport& rep, const Jet& jet, const sosform::LasserreSolution& las) {
  const Vec& x_k = rep.center;
  rep.diag.grad_norm_center = linalg::norm2(jet.grad());
  rep.diag.surrogate_value_gap = std::fabs(rep.surrogate.eval(x_k) - jet.value());
  Vec gdiff = rep.surrogate.eval_grad(x_k);
  const Vec gf = jet.grad();
  for (size_t i = 0; i < gdiff.size(); ++i) gdiff[i] -= gf[i];
  rep.diag.surrogate_grad_gap = linalg::norm2(gdiff);
  rep.diag.surrogate_grad_at_next = las.stationarity;
  rep.diag.lasserre_gap = las.gap;
  rep.diag.sdp_iterations_minimize = las.raw.iterations;
}

void verify_step_certificate(StepReport& rep) {
  const sosform::VerifyReport vr = sosform::verify_certificate(rep.certificate);
  rep.diag.cert_residual = vr.residual;
  rep.diag.cert_min_eig = vr.min_eig;
  if (!vr.ok) {
    std::ostringstream os;
    os << "certificate verification failed: residual " << vr.residual << ", min eig " << vr.min_eig;
    throw SolverError(os.str());
  }
}

}  // namespace

StepReport step_order_d(const FunctionOracle& f, const Vec& x_k, int d, double eps,
                        const sosform::SolveConfig& cfg) {
  if (d < 3) throw std::invalid_argument("step_order_d requires d >= 3");
  if (!(eps > 0.0)) throw std::invalid_argument("step_order_d requires eps > 0");
  const Jet jet = f.jet_at(x_k, d);
  Polynomial T_c(f.dim);
  for (size_t i = 0; i < jet.basis().size(); ++i) T_c.add_term(jet.basis()[i], jet.coeffs()[i]);

  StepReport rep;
  rep.center = x_k;
  rep.dprime = (d % 2 == 1) ? d + 1 : d + 2;
  rep.diag.lambda_min_hess = linalg::min_eigenvalue_sym(jet.hess());
  const double lam = rep.diag.lambda_min_hess;

  sosform::MinTResult weight;
  if (lam > 0.0) {
    rep.branch = Branch::PD;
    rep.diag.pd_eig_tiny = lam <= 1e-12;
    weight = sosform::min_t_centered(T_c, rep.dprime, cfg);
    if (weight.outcome == sosform::MinTOutcome::Infeasible)
      throw SolverError("regularization program infeasible despite a positive definite Hessian");
  } else {
    rep.branch = Branch::Shifted;
    rep.eps_used = eps;
    weight = sosform::min_t_bar_centered(T_c, eps, lam, rep.dprime, cfg);
  }
  if (weight.outcome != sosform::MinTOutcome::Ok) throw SolverError(weight.message);
  rep.t_or_tbar = weight.t_star;
  rep.diag.sdp_iterations_weight = weight.raw.iterations;
  rep.certificate = weight.certificate;

  const sosform::LasserreSolution las = sosform::lasserre_minimize(weight.surrogate_centered, cfg);
  if (!las.ok) throw SolverError(las.message);
  rep.next = plus(x_k, las.minimizer);
  rep.diag.stalled_nonconvex_stationary =
      rep.branch == Branch::Shifted &&
      linalg::norm2(las.minimizer) <= 1e-12 * std::max(1.0, linalg::norm2(x_k));

  const Vec back = negated(x_k);
  rep.taylor = T_c.translate(back);
  rep.surrogate = weight.surrogate_centered.translate(back);
  fill_common_diagnostics(rep, jet, las);
  verify_step_certificate(rep);
  return rep;
}

StepReport step_global(const FunctionOracle& f, const Vec& x_k, int d, double M,
                       const sosform::SolveConfig& cfg) {
  if (d < 3 || d % 2 == 0) throw std::invalid_argument("step_global requires odd d >= 3");
  if (!(M >= 0.0) || !std::isfinite(M))
    throw std::invalid_argument("step_global requires a finite Lipschitz bound M >= 0");
  const Jet jet = f.jet_at(x_k, d);
  Polynomial T_c(f.dim);
  for (size_t i = 0; i < jet.basis().size(); ++i) T_c.add_term(jet.basis()[i], jet.coeffs()[i]);

  StepReport rep;
  rep.center = x_k;
  rep.branch = Branch::Global;
  rep.dprime = d + 1;
  rep.diag.lambda_min_hess = linalg::min_eigenvalue_sym(jet.hess());
  if (!(rep.diag.lambda_min_hess > 0.0))
    throw SolverError("precondition violated: Hessian not positive definite at the iterate");

  sosform::MinTResult weight = sosform::min_t_centered(T_c, rep.dprime, cfg);
  if (weight.outcome == sosform::MinTOutcome::Infeasible)
    throw SolverError("precondition violated: regularization program infeasible");
  if (weight.outcome != sosform::MinTOutcome::Ok) throw SolverError(weight.message);
  rep.diag.sdp_iterations_weight = weight.raw.iterations;

  rep.t_or_tbar = std::max(d * M / factorial(d + 1), weight.t_star);
  const Polynomial reg = polycore::even_norm_power(f.dim, Vec(f.dim, 0.0), rep.dprime);
  const Polynomial psi_c = T_c + reg * rep.t_or_tbar;

  // conic combination of sos-convex polynomials; certify it directly
  sosform::FeasibilityResult fc = sosform::check_sosconvex(psi_c, cfg);
  if (!fc.feasible) throw SolverError("failed to certify the majorizing surrogate sos-convex");
  rep.certificate.polynomial = psi_c;
  rep.certificate.gramform = fc.gram;
  rep.certificate.min_eig = linalg::min_eigenvalue_sym(fc.gram.gram);

  const sosform::LasserreSolution las = sosform::lasserre_minimize(psi_c, cfg);
  if (!las.ok) throw SolverError(las.message);
  rep.next = plus(x_k, las.minimizer);

  const Vec back = negated(x_k);
  rep.taylor = T_c.translate(back);
  rep.surrogate = psi_c.translate(back);
  fill_common_diagnostics(rep, jet, las);
  verify_step_certificate(rep);
  return rep;
}

Vec classical_newton_step(const FunctionOracle& f, const Vec& x_k) {
  const Jet jet = f.jet_at(x_k, 2);
  try {
    const Vec s = linalg::solve_linear(jet.hess(), jet.grad());
    Vec next = x_k;
    for (size_t i = 0; i < next.size(); ++i) next[i] -= s[i];
    return next;
  } catch (const std::runtime_error&) {
    throw SolverError("classical Newton step: singular Hessian");
  }
}

namespace {

using Stepper = std::function<Vec(const Vec&, Trace&)>;

Trace run_loop(const FunctionOracle& f, const Vec& x0, const Options& opts, const Stepper& step,
               bool enforce_descent) {
  Trace tr;
  Vec x = x0;
  while (true) {
    const Jet j = f.jet_at(x, 1);
    tr.iterates.push_back(x);
    tr.values.push_back(j.value());
    tr.grad_norms.push_back(linalg::norm2(j.grad()));
    const size_t k = tr.iterates.size() - 1;
    if (enforce_descent && k > 0) {
      const double allowed = tr.values[k - 1] + 1e-10 * std::max(1.0, std::fabs(tr.values[k - 1]));
      if (tr.values[k] > allowed) {
        tr.termination = Termination::SolverFailure;
        tr.message = "monotone descent violated";
        return tr;
      }
    }
    if (tr.grad_norms.back() <= opts.grad_tol) {
      tr.termination = Termination::GradTol;
      return tr;
    }
    if (linalg::norm2(x) > opts.divergence_norm) {
      tr.termination = Termination::Diverged;
      return tr;
    }
    if (static_cast<int>(k) >= opts.max_iter) {
      tr.termination = Termination::MaxIter;
      return tr;
    }
    try {
      x = step(x, tr);
    } catch (const SolverError& e) {
      tr.termination = Termination::SolverFailure;
      tr.message = e.what();
      return tr;
    }
  }
}

}  // namespace

Trace minimize(const FunctionOracle& f, const Vec& x0, int d, const Options& opts) {
  return run_loop(
      f, x0, opts,
      [&](const Vec& x, Trace& tr) {
        StepReport rep = step_order_d(f, x, d, opts.eps, opts.solve);
        Vec next = rep.next;
        tr.steps.push_back(std::move(rep));
        return next;
      },
      false);
}

Trace minimize_global(const FunctionOracle& f, const Vec& x0, int d, double M,
                      const Options& opts) {
  return run_loop(
      f, x0, opts,
      [&](const Vec& x, Trace& tr) {
        StepReport rep = step_global(f, x, d, M, opts.solve);
        Vec next = rep.next;
        tr.steps.push_back(std::move(rep));
        return next;
      },
      true);
}

Trace minimize_classical(const FunctionOracle& f, const Vec& x0, const Options& opts) {
  return run_loop(
      f, x0, opts, [&](const Vec& x, Trace&) { return classical_newton_step(f, x); }, false);
}

std::optional<double> empirical_order(const Trace& t, const Vec& xstar) {
  std::vector<double> logs;
  logs.reserve(t.iterates.size());
  for (const Vec& x : t.iterates) {
    Vec d(x.size());
    for (size_t i = 0; i < x.size(); ++i) d[i] = x[i] - xstar[i];
    logs.push_back(linalg::norm2(d));
  }
  std::vector<std::pair<double, double>> pts;
  for (size_t k = 0; k + 1 < logs.size(); ++k) {
    const bool ok_k = logs[k] > 1e-13 && logs[k] < 1e-1;
    const bool ok_k1 = logs[k + 1] > 1e-13 && logs[k + 1] < 1e-1;
    if (ok_k && ok_k1) pts.emplace_back(std::log(logs[k]), std::log(logs[k + 1]));
  }
  if (pts.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [a, b] : pts) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json poly_json(const Polynomial& p) { return nlohmann::json::parse(p.to_json()); }

nlohmann::json vec_json(const Vec& v) { return nlohmann::json(v); }

}  // namespace

std::string trace_to_csv(const Trace& t) {
  std::ostringstream os;
  const int n = t.iterates.empty() ? 0 : static_cast<int>(t.iterates.front().size());
  os << "k";
  for (int i = 0; i < n; ++i) os << ",x" << (i + 1);
  os << ",f,grad_norm,t,branch\n";
  for (size_t k = 0; k < t.iterates.size(); ++k) {
    os << k;
    for (int i = 0; i < n; ++i) os << "," << fmt(t.iterates[k][i]);
    os << "," << fmt(t.values[k]) << "," << fmt(t.grad_norms[k]);
    if (k < t.steps.size())
      os << "," << fmt(t.steps[k].t_or_tbar) << "," << to_string(t.steps[k].branch);
    else
      os << ",,";
    os << "\n";
  }
  return os.str();
}

std::string trace_to_json(const Trace& t, const std::string& function_name, int d,
                          const std::string& method) {
  nlohmann::json j;
  j["function"] = function_name;
  j["d"] = d;
  j["method"] = method;
  j["termination"] = to_string(t.termination);
  j["message"] = t.message;
  j["iterates"] = nlohmann::json::array();
  for (const auto& x : t.iterates) j["iterates"].push_back(vec_json(x));
  j["values"] = t.values;
  j["grad_norms"] = t.grad_norms;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    nlohmann::json js;
    js["center"] = vec_json(s.center);
    js["branch"] = to_string(s.branch);
    js["t_or_tbar"] = s.t_or_tbar;
    if (s.eps_used)
      js["eps_used"] = *s.eps_used;
    else
      js["eps_used"] = nullptr;
    js["dprime"] = s.dprime;
    js["next"] = vec_json(s.next);
    js["taylor"] = poly_json(s.taylor);
    js["surrogate"] = poly_json(s.surrogate);
    nlohmann::json cert;
    cert["polynomial"] = poly_json(s.certificate.polynomial);
    cert["target"] = poly_json(s.certificate.gramform.target);
    cert["min_eig"] = s.certificate.min_eig;
    nlohmann::json basis = nlohmann::json::array();
    for (const auto& e : s.certificate.gramform.basis) {
      nlohmann::json be;
      be["exp"] = e.mono.exponents();
      be["y"] = e.ycoord;
      basis.push_back(be);
    }
    cert["basis"] = basis;
    const linalg::Mat& g = s.certificate.gramform.gram;
    nlohmann::json gram = nlohmann::json::array();
    for (int r = 0; r < g.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
      gram.push_back(row);
    }
    cert["gram"] = gram;
    js["certificate"] = cert;
    nlohmann::json diag;
    diag["lambda_min_hess"] = s.diag.lambda_min_hess;
    diag["grad_norm_center"] = s.diag.grad_norm_center;
    diag["surrogate_value_gap"] = s.diag.surrogate_value_gap;
    diag["surrogate_grad_gap"] = s.diag.surrogate_grad_gap;
    diag["surrogate_grad_at_next"] = s.diag.surrogate_grad_at_next;
    diag["cert_residual"] = s.diag.cert_residual;
    diag["cert_min_eig"] = s.diag.cert_min_eig;
    diag["lasserre_gap"] = s.diag.lasserre_gap;
    diag["sdp_iterations_weight"] = s.diag.sdp_iterations_weight;
    diag["sdp_iterations_minimize"] = s.diag.sdp_iterations_minimize;
    diag["pd_eig_tiny"] = s.diag.pd_eig_tiny;
    diag["stalled_nonconvex_stationary"] = s.diag.stalled_nonconvex_stationary;
    js["diagnostics"] = diag;
    steps.push_back(js);
  }
  j["steps"] = steps;
  return j.dump(2);
}

}  // namespace sosnewton::hon
