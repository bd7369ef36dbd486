#include "sosnewton/sosform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sosnewton::sosform {

using conicsolve::BlockEntry;
using conicsolve::SdpConstraint;
using conicsolve::SdpProblem;
using conicsolve::SdpSolution;
using conicsolve::SdpStatus;
using polycore::monomial_basis;

namespace {

MultiIndex embed_x(const MultiIndex& m, int n2) {
  std::vector<int> e(n2, 0);
  for (int i = 0; i < m.dim(); ++i) e[i] = m[i];
  return MultiIndex(std::move(e));
}

// Isotropic coordinate rescaling u = rho * v chosen so the dilated
// polynomial has O(1) coefficients. sos-convexity is invariant under the
// change of variables, and the optimal weight and Gram matrix map back
// exactly, so this only improves SDP conditioning.
double balance_scale(const Polynomial& p) {
  std::map<int, double> per_degree;
  for (const auto& [m, c] : p.terms()) {
    const int k = m.degree();
    if (k == 0) continue;
    per_degree[k] = std::max(per_degree[k], std::fabs(c));
  }
  double s = 0.0;
  for (const auto& [k, c] : per_degree)
    if (c > 0.0) s = std::max(s, std::pow(c, 1.0 / k));
  if (s <= 0.0) return 1.0;
  return std::min(1e6, std::max(1e-6, 1.0 / s));
}

// Gram of the dilated problem back to original coordinates: congruence by
// the diagonal rho^-(deg) (plain sos) or rho^-(deg+1) (Kronecker biform).
Mat unscale_gram(const std::vector<GramBasisElem>& basis, const Mat& g, double rho) {
  const int N = static_cast<int>(basis.size());
  Mat out(N, N);
  std::vector<double> d(N);
  for (int i = 0; i < N; ++i) {
    const int e = basis[i].mono.degree() + (basis[i].ycoord >= 0 ? 1 : 0);
    d[i] = std::pow(rho, -e);
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out(i, j) = d[i] * g(i, j) * d[j];
  return out;
}

std::string dump_name(const std::string& dir, const char* kind) {
  static std::atomic<int> seq{0};
  std::ostringstream os;
  os << dir << "/sdp_" << seq.fetch_add(1) << "_" << kind << ".txt";
  return os.str();
}

conicsolve::SdpOptions options_for(const SolveConfig& cfg, const char* kind) {
  conicsolve::SdpOptions o = cfg.sdp;
  if (!cfg.dump_dir.empty()) o.dump_path = dump_name(cfg.dump_dir, kind);
  return o;
}

}  // namespace

Polynomial hessian_biform(const Polynomial& p) {
  const int n = p.dim();
  const polycore::PolyMatrix h = polycore::hessian(p);
  Polynomial q(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double w = (i == j) ? 1.0 : 2.0;
      for (const auto& [m, c] : h.at(i, j).terms()) {
        std::vector<int> e(2 * n, 0);
        for (int v = 0; v < n; ++v) e[v] = m[v];
        e[n + i] += 1;
        e[n + j] += 1;
        q.add_term(MultiIndex(std::move(e)), w * c);
      }
    }
  }
  return q;
}

SosSystem build_sos_constraint(const Polynomial& p) {
  const int deg = p.degree();
  if (deg % 2 != 0) throw std::invalid_argument("sos constraint requires even degree");
  const int n = p.dim();
  SosSystem sys;
  sys.target_dim = n;
  for (const MultiIndex& m : monomial_basis(n, deg / 2)) sys.basis.push_back({m, -1});
  std::map<MultiIndex, std::vector<std::array<int, 2>>> eqs;
  const int N = static_cast<int>(sys.basis.size());
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j)
      eqs[sys.basis[i].mono.plus(sys.basis[j].mono)].push_back({i, j});
  for (auto& [key, pairs] : eqs) sys.equations.push_back({key, std::move(pairs)});
  return sys;
}

SosSystem build_sosconvex_system(int n, int degree) {
  if (degree % 2 != 0 || degree < 2)
    throw std::invalid_argument("sos-convexity requires even degree >= 2");
  SosSystem sys;
  sys.target_dim = 2 * n;
  const std::vector<MultiIndex> xbasis = monomial_basis(n, degree / 2 - 1);
  for (const MultiIndex& m : xbasis)
    for (int i = 0; i < n; ++i) sys.basis.push_back({m, i});
  const int N = static_cast<int>(sys.basis.size());
  std::map<MultiIndex, std::vector<std::array<int, 2>>> eqs;
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      std::vector<int> e(2 * n, 0);
      const MultiIndex xs = sys.basis[i].mono.plus(sys.basis[j].mono);
      for (int v = 0; v < n; ++v) e[v] = xs[v];
      e[n + sys.basis[i].ycoord] += 1;
      e[n + sys.basis[j].ycoord] += 1;
      eqs[MultiIndex(std::move(e))].push_back({i, j});
    }
  }
  for (auto& [key, pairs] : eqs) sys.equations.push_back({key, std::move(pairs)});
  return sys;
}

SosSystem build_sosconvex_constraint(const Polynomial& p) {
  return build_sosconvex_system(p.dim(), p.degree());
}

namespace {

// Assembles {Q psd, equations(Q) matched to target [+ t-column]} into a
// block SDP. When reg is non-null, a 1x1 block holding t >= 0 is appended,
// the equations become <A_e, Q> - t*reg_e = target_e, and the objective is t;
// otherwise the objective is the identity on the Gram block (feasibility).
SdpProblem assemble(const SosSystem& sys, const Polynomial& target, const Polynomial* reg) {
  SdpProblem p;
  const int N = static_cast<int>(sys.basis.size());
  p.block_dims.push_back(N);
  if (reg) p.block_dims.push_back(1);
  if (reg) {
    p.objective.push_back({1, 0, 0, 1.0});
  } else {
    for (int i = 0; i < N; ++i) p.objective.push_back({0, i, i, 1.0});
  }
  for (const auto& eq : sys.equations) {
    SdpConstraint c;
    for (const auto& pr : eq.pairs) c.entries.push_back({0, pr[0], pr[1], 1.0});
    if (reg) {
      const double rc = reg->coeff(eq.key);
      if (rc != 0.0) c.entries.push_back({1, 0, 0, -rc});
    }
    c.rhs = target.coeff(eq.key);
    p.constraints.push_back(std::move(c));
  }
  return p;
}

// The solver certifies infeasibility itself, including the weakly
// infeasible diverging-dual pattern (ray checks run on every failure exit).
bool looks_infeasible(const SdpSolution& sol) {
  return sol.status == SdpStatus::PrimalInfeasible;
}

MinTResult run_min_t(const Polynomial& T_centered, int dprime, const SolveConfig& cfg,
                     const char* kind) {
  const int n = T_centered.dim();
  if (dprime % 2 != 0 || dprime <= T_centered.degree())
    throw std::invalid_argument("regularizer degree must be even and exceed deg(T)");
  const Polynomial reg = polycore::even_norm_power(n, Vec(n, 0.0), dprime);
  const SosSystem sys = build_sosconvex_system(n, dprime);
  const Polynomial reg_biform = hessian_biform(reg);
  // Candidate balancings, accepted only if the resulting certificate
  // verifies. The biform scale (constant and linear terms of T are invisible
  // to the sos-convexity constraint) is usually best, but the conditioning
  // of extreme instances is not monotone in any single heuristic.
  const std::vector<double> rhos = {balance_scale(hessian_biform(T_centered)),
                                    balance_scale(T_centered), 1.0};
  MinTResult res;
  bool have_cand = false;
  double cand_t = 0.0;
  double cand_gap = 0.0;
  for (size_t attempt = 0; attempt < rhos.size(); ++attempt) {
    const double rho = rhos[attempt];
    if (attempt > 0 && std::fabs(rho - rhos[attempt - 1]) <=
                           1e-12 * std::max(std::fabs(rho), std::fabs(rhos[attempt - 1])))
      continue;
    const Polynomial T_scaled = T_centered.dilate(rho);
    const Polynomial target = hessian_biform(T_scaled);
    const SdpProblem sdp = assemble(sys, target, &reg_biform);
    res.raw = conicsolve::solve(sdp, options_for(cfg, kind));
    // Infeasibility verdicts are only trusted under the primary balanced
    // scaling; a fallback scaling can shrink the eps-level curvature below
    // solver precision and mimic the weakly infeasible pattern.
    if (attempt == 0 && looks_infeasible(res.raw)) {
      res.outcome = MinTOutcome::Infeasible;
      res.message = "no regularization weight makes the surrogate sos-convex";
      return res;
    }
    // keep the most trustworthy weight estimate seen so far
    if (res.raw.X.size() == 2 && res.raw.rel_gap < 0.5) {
      const double t_est = res.raw.X[1](0, 0) * std::pow(rho, -dprime);
      if (std::isfinite(t_est) && t_est >= 0.0 &&
          (!have_cand || res.raw.rel_gap < cand_gap)) {
        have_cand = true;
        cand_t = t_est;
        cand_gap = res.raw.rel_gap;
      }
    }
    if (res.raw.status != SdpStatus::Optimal) continue;
    res.outcome = MinTOutcome::Ok;
    res.t_star = res.raw.X[1](0, 0) * std::pow(rho, -dprime);
    res.surrogate_centered = T_centered + reg * res.t_star;
    res.certificate.polynomial = res.surrogate_centered;
    res.certificate.gramform.basis = sys.basis;
    res.certificate.gramform.target = hessian_biform(res.surrogate_centered);
    Mat g = res.raw.X[0];
    linalg::symmetrize(g);
    res.certificate.gramform.gram = unscale_gram(sys.basis, g, rho);
    res.certificate.min_eig = linalg::min_eigenvalue_sym(res.certificate.gramform.gram);
    if (verify_certificate(res.certificate).ok) return res;
  }
  // At the exact minimum the Gram sits on the psd boundary; when the data
  // spread leaves no attempt certifiable in double precision, certify a
  // slightly inflated weight instead. Any t >= t* keeps the surrogate
  // sos-convex and moves the Gram strictly inside the cone, and the
  // inflation stays within the accuracy the estimate carries anyway.
  if (have_cand) {
    // escalate until a strictly interior Gram certifies; the weight estimate
    // from a failed solve can undershoot by more than its gap suggests
    for (double bump : {std::max(kCertResidualTol, 10.0 * cand_gap), 1e-2, 1.0}) {
      const double t_infl = cand_t * (1.0 + bump) + 1e-12;
      const Polynomial inflated = T_centered + reg * t_infl;
      FeasibilityResult fr = check_sosconvex(inflated, cfg);
      if (!fr.feasible) continue;
      MinTResult out;
      out.outcome = MinTOutcome::Ok;
      out.t_star = t_infl;
      out.surrogate_centered = inflated;
      out.certificate.polynomial = inflated;
      out.certificate.gramform = fr.gram;
      out.certificate.min_eig = linalg::min_eigenvalue_sym(fr.gram.gram);
      out.raw = fr.raw;
      if (verify_certificate(out.certificate).ok) return out;
    }
    res.outcome = MinTOutcome::SolverFailure;
    res.message = "weight estimated but no certificate verified at tolerance";
    return res;
  }
  res.outcome = MinTOutcome::SolverFailure;
  res.message = std::string("sdp solve failed: ") + conicsolve::to_string(res.raw.status) +
                (res.raw.message.empty() ? "" : " (" + res.raw.message + ")");
  return res;
}

}  // namespace

MinTResult min_t_centered(const Polynomial& T_centered, int dprime, const SolveConfig& cfg) {
  return run_min_t(T_centered, dprime, cfg, "mint");
}

MinTResult min_t(const Polynomial& T, const Vec& center, int dprime, const SolveConfig& cfg) {
  return min_t_centered(T.translate(center), dprime, cfg);
}

MinTResult min_t_bar_centered(const Polynomial& T_centered, double eps, double lam_min,
                              int dprime, const SolveConfig& cfg) {
  if (!(eps > 0.0)) throw std::invalid_argument("min_t_bar requires eps > 0");
  const int n = T_centered.dim();
  const Polynomial shift = polycore::even_norm_power(n, Vec(n, 0.0), 2) * (0.5 * (eps - lam_min));
  MinTResult res = run_min_t(T_centered + shift, dprime, cfg, "mintbar");
  if (res.outcome == MinTOutcome::Infeasible) {
    // feasible by construction; an infeasibility verdict is a solver artifact
    res.outcome = MinTOutcome::SolverFailure;
    res.message = "solver reported the always-feasible shifted program infeasible";
  }
  return res;
}

MinTResult min_t_bar(const Polynomial& T, const Vec& center, double eps, double lam_min,
                     int dprime, const SolveConfig& cfg) {
  return min_t_bar_centered(T.translate(center), eps, lam_min, dprime, cfg);
}

FeasibilityResult check_sos(const Polynomial& p, const SolveConfig& cfg) {
  const SosSystem sys = build_sos_constraint(p);
  const double rho = balance_scale(p);
  const SdpProblem sdp = assemble(sys, p.dilate(rho), nullptr);
  FeasibilityResult r;
  r.raw = conicsolve::solve(sdp, options_for(cfg, "sos"));
  if (r.raw.status == SdpStatus::Optimal) {
    r.feasible = true;
    r.decided = true;
    r.gram.basis = sys.basis;
    r.gram.target = p;
    Mat g = r.raw.X[0];
    linalg::symmetrize(g);
    r.gram.gram = unscale_gram(sys.basis, g, rho);
  } else if (looks_infeasible(r.raw)) {
    r.decided = true;
  }
  return r;
}

FeasibilityResult check_sosconvex(const Polynomial& p, const SolveConfig& cfg) {
  const SosSystem sys = build_sosconvex_constraint(p);
  const std::vector<double> rhos = {balance_scale(hessian_biform(p)), balance_scale(p), 1.0};
  FeasibilityResult first_feasible;
  bool have_feasible = false;
  FeasibilityResult r;
  for (size_t attempt = 0; attempt < rhos.size(); ++attempt) {
    const double rho = rhos[attempt];
    if (attempt > 0 && std::fabs(rho - rhos[attempt - 1]) <=
                           1e-12 * std::max(std::fabs(rho), std::fabs(rhos[attempt - 1])))
      continue;
    const SdpProblem sdp = assemble(sys, hessian_biform(p.dilate(rho)), nullptr);
    r.raw = conicsolve::solve(sdp, options_for(cfg, "sosconvex"));
    if (attempt == 0 && looks_infeasible(r.raw)) {
      r.decided = true;
      return r;
    }
    if (r.raw.status != SdpStatus::Optimal) continue;
    r.feasible = true;
    r.decided = true;
    r.gram.basis = sys.basis;
    r.gram.target = hessian_biform(p);
    Mat g = r.raw.X[0];
    linalg::symmetrize(g);
    r.gram.gram = unscale_gram(sys.basis, g, rho);
    if (verify_certificate(r.gram).ok) return r;
    if (!have_feasible) {
      first_feasible = r;
      have_feasible = true;
    }
  }
  return have_feasible ? first_feasible : r;
}

LasserreSolution lasserre_minimize(const Polynomial& psi, const SolveConfig& cfg) {
  const int n = psi.dim();
  const int deg = psi.degree();
  if (deg % 2 != 0 || deg < 2)
    throw std::invalid_argument("lasserre_minimize requires even degree >= 2");
  const std::vector<MultiIndex> basis = monomial_basis(n, deg / 2);
  const std::vector<MultiIndex> full = monomial_basis(n, deg);
  const int N = static_cast<int>(basis.size());

  // index of each monomial of degree <= deg in `full`
  std::map<MultiIndex, int> full_index;
  for (size_t i = 0; i < full.size(); ++i) full_index.emplace(full[i], static_cast<int>(i));

  SdpProblem sdp;
  sdp.block_dims = {N, 1, 1};  // Gram, gamma+, gamma-
  sdp.objective.push_back({1, 0, 0, -1.0});
  sdp.objective.push_back({2, 0, 0, 1.0});
  std::map<MultiIndex, std::vector<std::array<int, 2>>> eqs;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) eqs[basis[i].plus(basis[j])].push_back({i, j});
  std::vector<MultiIndex> eq_keys;
  for (const MultiIndex& m : full) {
    SdpConstraint c;
    auto it = eqs.find(m);
    if (it != eqs.end())
      for (const auto& pr : it->second) c.entries.push_back({0, pr[0], pr[1], 1.0});
    if (m.degree() == 0) {
      c.entries.push_back({1, 0, 0, 1.0});
      c.entries.push_back({2, 0, 0, -1.0});
    }
    c.rhs = psi.coeff(m);
    sdp.constraints.push_back(std::move(c));
    eq_keys.push_back(m);
  }

  LasserreSolution out;
  out.raw = conicsolve::solve(sdp, options_for(cfg, "lasserre"));
  if (out.raw.status != SdpStatus::Optimal) {
    out.message = std::string("sdp solve failed: ") + conicsolve::to_string(out.raw.status) +
                  (out.raw.message.empty() ? "" : " (" + out.raw.message + ")");
    return out;
  }
  out.gamma_star = -out.raw.primal_obj;

  // moments are the negated equation multipliers
  Vec z(eq_keys.size());
  for (size_t i = 0; i < z.size(); ++i) z[i] = -out.raw.y[i];
  const double z0 = z[full_index.at(MultiIndex::zero(n))];
  out.moment_matrix = Mat(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      out.moment_matrix(i, j) = z[full_index.at(basis[i].plus(basis[j]))];
  out.minimizer.resize(n);
  for (int v = 0; v < n; ++v) out.minimizer[v] = z[full_index.at(MultiIndex::unit(n, v))];

  const double scale = std::max(1.0, psi.max_abs_coeff());
  // The degree-1 moments locate the minimizer to O(sqrt(mu)) only (the
  // minimizer lives in the rank-deficient directions of the moment matrix).
  // A few Newton steps on the convex psi recover full precision; psi is
  // sos-convex, so the refinement cannot leave the unique minimizer.
  {
    Vec xr = out.minimizer;
    double best = linalg::norm2(psi.eval_grad(xr));
    Vec xbest = xr;
    for (int it = 0; it < 8 && best > 1e-15 * scale; ++it) {
      Mat h = psi.eval_hess(xr);
      for (int i = 0; i < n; ++i) h(i, i) += 1e-14 * scale;
      Vec step;
      try {
        step = linalg::solve_linear(h, psi.eval_grad(xr));
      } catch (const std::runtime_error&) {
        break;
      }
      for (int i = 0; i < n; ++i) xr[i] -= step[i];
      const double gn = linalg::norm2(psi.eval_grad(xr));
      if (gn >= best) break;
      best = gn;
      xbest = xr;
    }
    if (best < linalg::norm2(psi.eval_grad(out.minimizer))) out.minimizer = xbest;
  }
  out.stationarity = linalg::norm2(psi.eval_grad(out.minimizer));
  out.gap = psi.eval(out.minimizer) - out.gamma_star;
  const bool norm_ok = std::fabs(z0 - 1.0) <= 1e-6;
  const bool stat_ok = out.stationarity <= 1e-7 * scale;
  const bool gap_ok = out.gap <= 1e-6 * scale;
  out.ok = norm_ok && stat_ok && gap_ok;
  if (!out.ok) {
    std::ostringstream os;
    os << "minimizer extraction checks failed:";
    if (!norm_ok) os << " moment normalization " << z0;
    if (!stat_ok) os << " stationarity " << out.stationarity;
    if (!gap_ok) os << " gap " << out.gap;
    out.message = os.str();
  }
  return out;
}

VerifyReport verify_certificate(const GramForm& g) {
  VerifyReport rep;
  const int N = static_cast<int>(g.basis.size());
  const int td = g.target.dim();
  Polynomial recon(td);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      const double q = g.gram(i, j);
      if (q == 0.0) continue;
      MultiIndex key = embed_x(g.basis[i].mono.plus(g.basis[j].mono), td);
      if (g.basis[i].ycoord >= 0) {
        const int n = g.basis[i].mono.dim();
        std::vector<int> e = key.exponents();
        e[n + g.basis[i].ycoord] += 1;
        e[n + g.basis[j].ycoord] += 1;
        key = MultiIndex(std::move(e));
      }
      recon.add_term(key, (i == j ? 1.0 : 2.0) * q);
    }
  }
  const Polynomial diff = recon - g.target;
  rep.residual = diff.max_abs_coeff() / std::max(1.0, g.target.max_abs_coeff());
  rep.min_eig = N > 0 ? linalg::min_eigenvalue_sym(g.gram) : 0.0;
  rep.ok = rep.residual <= kCertResidualTol && rep.min_eig >= kCertEigFloor;
  return rep;
}

VerifyReport verify_certificate(const SosConvexCertificate& c) {
  VerifyReport rep = verify_certificate(c.gramform);
  // the stored target must actually be the biform of the stored polynomial
  const Polynomial expected = hessian_biform(c.polynomial);
  const double drift = (expected - c.gramform.target).max_abs_coeff() /
                       std::max(1.0, expected.max_abs_coeff());
  if (drift > kCertResidualTol) rep.ok = false;
  rep.residual = std::max(rep.residual, drift);
  return rep;
}

}  // namespace sosnewton::sosform
