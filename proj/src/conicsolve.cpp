#include "sosnewton/conicsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace sosnewton::conicsolve {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SdpStatus::DualInfeasible: return "DualInfeasible";
    case SdpStatus::MaxIterations: return "MaxIterations";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

size_t svec_len(const std::vector<int>& dims) {
  size_t L = 0;
  for (int n : dims) L += static_cast<size_t>(n) * (n + 1) / 2;
  return L;
}

size_t svec_offset(const std::vector<int>& dims, int block) {
  size_t off = 0;
  for (int b = 0; b < block; ++b) off += static_cast<size_t>(dims[b]) * (dims[b] + 1) / 2;
  return off;
}

// Packs the upper triangle with sqrt(2) off-diagonal weights so that the
// Euclidean dot of two packed rows equals <A, B>.
Vec svec_row(const std::vector<int>& dims, const std::vector<BlockEntry>& entries) {
  Vec v(svec_len(dims), 0.0);
  for (const auto& e : entries) {
    const int n = dims[e.block];
    const int r = std::min(e.row, e.col), c = std::max(e.row, e.col);
    const size_t base = svec_offset(dims, e.block);
    // index of (r,c), r<=c, within the packed upper triangle
    const size_t idx = base + static_cast<size_t>(r) * n - static_cast<size_t>(r) * (r - 1) / 2 + (c - r);
    v[idx] += (r == c) ? e.value : kSqrt2 * e.value;
  }
  return v;
}

void validate(const SdpProblem& p) {
  const int nb = static_cast<int>(p.block_dims.size());
  for (int n : p.block_dims)
    if (n < 1) throw std::invalid_argument("sdp: block dimension must be positive");
  auto check = [&](const BlockEntry& e) {
    if (e.block < 0 || e.block >= nb) throw std::invalid_argument("sdp: entry block out of range");
    const int n = p.block_dims[e.block];
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
      throw std::invalid_argument("sdp: entry index out of range");
  };
  for (const auto& e : p.objective) check(e);
  for (const auto& c : p.constraints)
    for (const auto& e : c.entries) check(e);
}

std::vector<Mat> dense_blocks(const SdpProblem& p, const std::vector<BlockEntry>& entries) {
  std::vector<Mat> out;
  out.reserve(p.block_dims.size());
  for (int n : p.block_dims) out.emplace_back(n, n);
  for (const auto& e : entries) {
    out[e.block](e.row, e.col) += e.value;
    if (e.row != e.col) out[e.block](e.col, e.row) += e.value;
  }
  return out;
}

double sparse_dot(const std::vector<BlockEntry>& entries, const std::vector<Mat>& X) {
  double s = 0.0;
  for (const auto& e : entries) {
    const double x = X[e.block](e.row, e.col);
    s += (e.row == e.col) ? e.value * x : 2.0 * e.value * x;
  }
  return s;
}

// G += v * (w_r w_c^T + w_c w_r^T) built from columns of the symmetric W.
void accumulate_waw(const Mat& W, const BlockEntry& e, Mat& G) {
  const int n = W.rows();
  for (int i = 0; i < n; ++i) {
    const double wir = W(i, e.row);
    const double wic = W(i, e.col);
    for (int j = 0; j < n; ++j) {
      double g = wir * W(j, e.col);
      if (e.row != e.col) g += wic * W(j, e.row);
      G(i, j) += e.value * g;
    }
  }
}

// Largest alpha in (0, 1] with X + alpha*dX psd, given the Cholesky factor of X.
double max_step(const Mat& chol_lower, const Mat& dX) {
  Mat T = dX;
  linalg::solve_lower_matrix(chol_lower, T);              // L^{-1} dX
  Mat Tt = linalg::transpose(T);
  linalg::solve_lower_matrix(chol_lower, Tt);             // L^{-1} dX L^{-T}, transposed
  Mat sym = Tt;
  linalg::symmetrize(sym);
  const double lmin = linalg::min_eigenvalue_sym(sym);
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -1.0 / lmin);
}

struct Workspace {
  std::vector<int> dims;
  std::vector<Mat> C;
  Vec b;
  std::vector<std::vector<BlockEntry>> A;  // per constraint

  Vec opA(const std::vector<Mat>& X) const {
    Vec out(A.size());
    for (size_t i = 0; i < A.size(); ++i) out[i] = sparse_dot(A[i], X);
    return out;
  }

  std::vector<Mat> opAt(const Vec& y) const {
    std::vector<Mat> out;
    out.reserve(dims.size());
    for (int n : dims) out.emplace_back(n, n);
    for (size_t i = 0; i < A.size(); ++i) {
      if (y[i] == 0.0) continue;
      for (const auto& e : A[i]) {
        out[e.block](e.row, e.col) += y[i] * e.value;
        if (e.row != e.col) out[e.block](e.col, e.row) += y[i] * e.value;
      }
    }
    return out;
  }
};

}  // namespace

SdpProblem presolve(const SdpProblem& p, PresolveReport& report) {
  validate(p);
  report = PresolveReport{};
  SdpProblem out;
  out.block_dims = p.block_dims;
  out.objective = p.objective;

  const double bmax = [&] {
    double m = 0.0;
    for (const auto& c : p.constraints) m = std::max(m, std::fabs(c.rhs));
    return std::max(1.0, m);
  }();

  std::vector<Vec> q_basis;   // orthonormalized kept rows
  Vec q_beta;                 // rhs transformed alongside
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    Vec v = svec_row(p.block_dims, p.constraints[i].entries);
    double beta = p.constraints[i].rhs;
    const double norm0 = linalg::norm2(v);
    if (norm0 <= 1e-300) {
      if (std::fabs(beta) > 1e-10 * bmax) {
        report.infeasible = true;
        report.note = "zero constraint row with nonzero right-hand side";
      }
      report.dropped_rows.push_back(static_cast<int>(i));
      continue;
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t k = 0; k < q_basis.size(); ++k) {
        const double c = linalg::dot(q_basis[k], v);
        if (c == 0.0) continue;
        for (size_t t = 0; t < v.size(); ++t) v[t] -= c * q_basis[k][t];
        beta -= c * q_beta[k];
      }
    }
    const double rnorm = linalg::norm2(v);
    if (rnorm <= 1e-10 * norm0) {
      if (std::fabs(beta) > 1e-8 * bmax) {
        report.infeasible = true;
        report.note = "dependent constraint row with inconsistent right-hand side";
      }
      report.dropped_rows.push_back(static_cast<int>(i));
      continue;
    }
    for (double& t : v) t /= rnorm;
    q_basis.push_back(std::move(v));
    q_beta.push_back(beta / rnorm);

    SdpConstraint kept;
    kept.entries = p.constraints[i].entries;
    for (auto& e : kept.entries) e.value /= norm0;
    kept.rhs = p.constraints[i].rhs / norm0;
    out.constraints.push_back(std::move(kept));
    report.row_scales.push_back(norm0);
  }
  if (!report.dropped_rows.empty() && report.note.empty()) {
    std::ostringstream os;
    os << "dropped " << report.dropped_rows.size() << " dependent constraint row(s)";
    report.note = os.str();
  }
  return out;
}

namespace {

SdpSolution solve_once(const SdpProblem& p_in, const SdpOptions& opts) {
  PresolveReport prep;
  const SdpProblem p = presolve(p_in, prep);
  if (!opts.dump_path.empty()) write_text_file(p, opts.dump_path);

  SdpSolution sol;
  sol.y.assign(p_in.constraints.size(), 0.0);
  if (prep.infeasible) {
    sol.status = SdpStatus::PrimalInfeasible;
    sol.message = "presolve: " + prep.note;
    return sol;
  }

  Workspace w;
  w.dims = p.block_dims;
  w.C = dense_blocks(p, p.objective);
  w.b.resize(p.constraints.size());
  w.A.resize(p.constraints.size());
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    w.b[i] = p.constraints[i].rhs;
    w.A[i] = p.constraints[i].entries;
  }
  const int m = static_cast<int>(w.b.size());
  const int nblocks = static_cast<int>(w.dims.size());
  double K = 0.0;
  for (int n : w.dims) K += n;

  double cnorm = 0.0;
  for (const auto& cb : w.C) cnorm += linalg::frob_norm(cb) * linalg::frob_norm(cb);
  cnorm = std::sqrt(cnorm);
  const double init_scale = std::max({1.0, linalg::norm_inf(w.b), cnorm});

  std::vector<Mat> X, S;
  for (int n : w.dims) {
    Mat I = Mat::identity(n);
    for (int i = 0; i < n; ++i) I(i, i) = init_scale;
    X.push_back(I);
    S.push_back(I);
  }
  Vec y(m, 0.0);

  auto finish = [&](SdpStatus st, const std::string& msg, int iters) {
    sol.status = st;
    sol.message = msg;
    sol.iterations = iters;
    sol.X = X;
    sol.S = S;
    // map multipliers back to the original row order / scaling
    sol.y.assign(p_in.constraints.size(), 0.0);
    size_t kept = 0;
    std::vector<bool> dropped(p_in.constraints.size(), false);
    for (int d : prep.dropped_rows) dropped[d] = true;
    for (size_t i = 0; i < p_in.constraints.size(); ++i) {
      if (dropped[i]) continue;
      sol.y[i] = y[kept] / prep.row_scales[kept];
      ++kept;
    }
    // residuals against the original problem, by direct substitution
    Workspace worig;
    worig.dims = p_in.block_dims;
    worig.C = dense_blocks(p_in, p_in.objective);
    worig.b.resize(p_in.constraints.size());
    worig.A.resize(p_in.constraints.size());
    for (size_t i = 0; i < p_in.constraints.size(); ++i) {
      worig.b[i] = p_in.constraints[i].rhs;
      worig.A[i] = p_in.constraints[i].entries;
    }
    Vec ax = worig.opA(X);
    Vec rp(worig.b.size());
    for (size_t i = 0; i < rp.size(); ++i) rp[i] = worig.b[i] - ax[i];
    sol.primal_res = linalg::norm2(rp) / (1.0 + linalg::norm2(worig.b));
    std::vector<Mat> aty = worig.opAt(sol.y);
    double dres2 = 0.0, cn2 = 0.0;
    double pobj = 0.0, dobj = linalg::dot(worig.b, sol.y);
    double gap = 0.0;
    for (int bidx = 0; bidx < static_cast<int>(worig.dims.size()); ++bidx) {
      pobj += linalg::dot(worig.C[bidx], X[bidx]);
      gap += linalg::dot(X[bidx], S[bidx]);
      Mat rd = worig.C[bidx];
      for (int i = 0; i < rd.rows(); ++i)
        for (int j = 0; j < rd.cols(); ++j) rd(i, j) -= S[bidx](i, j) + aty[bidx](i, j);
      dres2 += linalg::dot(rd, rd);
      cn2 += linalg::dot(worig.C[bidx], worig.C[bidx]);
    }
    sol.dual_res = std::sqrt(dres2) / (1.0 + std::sqrt(cn2));
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.rel_gap = std::fabs(gap) / (1.0 + std::max(std::fabs(pobj), std::fabs(dobj)));
    return sol;
  };

  Vec ynorm_hist;
  const double bnorm = linalg::norm2(w.b);

  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    // residuals
    Vec ax = w.opA(X);
    Vec rp(m);
    for (int i = 0; i < m; ++i) rp[i] = w.b[i] - ax[i];
    std::vector<Mat> aty = w.opAt(y);
    std::vector<Mat> Rd(nblocks);
    double dres2 = 0.0;
    double pobj = 0.0, gap = 0.0;
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      Mat rd = w.C[bidx];
      for (int i = 0; i < rd.rows(); ++i)
        for (int j = 0; j < rd.cols(); ++j) rd(i, j) -= S[bidx](i, j) + aty[bidx](i, j);
      dres2 += linalg::dot(rd, rd);
      Rd[bidx] = std::move(rd);
      pobj += linalg::dot(w.C[bidx], X[bidx]);
      gap += linalg::dot(X[bidx], S[bidx]);
    }
    const double dobj = linalg::dot(w.b, y);
    const double pres = linalg::norm2(rp) / (1.0 + bnorm);
    const double dres = std::sqrt(dres2) / (1.0 + cnorm);
    const double relgap = std::fabs(gap) / (1.0 + std::max(std::fabs(pobj), std::fabs(dobj)));

    if (opts.verbose)
      std::fprintf(stderr, "iter %3d mu %.3e pres %.3e dres %.3e gap %.3e pobj %.6e dobj %.6e\n",
                   iter, gap / K, pres, dres, relgap, pobj, dobj);
    if (pres <= opts.tol && dres <= opts.tol && relgap <= opts.tol)
      return finish(SdpStatus::Optimal, "", iter);

    // Infeasibility detection: a verified dual improving ray (b^T y > 0 with
    // sum y_i A_i negative semidefinite) certifies primal infeasibility, so
    // detection is conservative -- a miss shows up as MaxIterations, never as
    // a wrong Optimal. The ray is tested once the multipliers diverge and
    // again before any failure exit.
    const double ynorm = linalg::norm2(y);
    ynorm_hist.push_back(ynorm);
    auto try_ray = [&](int at_iter) -> std::optional<SdpSolution> {
      const double yn = linalg::norm2(y);
      if (yn < 1e5) return std::nullopt;
      Vec ray(m);
      for (int i = 0; i < m; ++i) ray[i] = y[i] / yn;
      const double bty = linalg::dot(w.b, ray);
      std::vector<Mat> Z = w.opAt(ray);
      double lmax = -std::numeric_limits<double>::infinity();
      for (const auto& zb : Z) lmax = std::max(lmax, linalg::max_eigenvalue_sym(zb));
      // Either a certificate with margin, or a near-feasible dual sequence
      // with diverging objective (the weakly infeasible pattern, where b^T of
      // the normalized ray tends to zero from above).
      const bool strong = bty >= 1e-6 && lmax <= 1e-9;
      const bool weak = bty > 0.0 && lmax <= 1e-9 && dres <= 1e-6 &&
                        dobj >= 1e7 * std::max(1.0, linalg::norm_inf(w.b));
      if (!strong && !weak) return std::nullopt;
      SdpSolution s2 = finish(SdpStatus::PrimalInfeasible, "dual improving ray detected", at_iter);
      // report the normalized ray in the original row order
      s2.infeasibility_ray.assign(p_in.constraints.size(), 0.0);
      size_t kept = 0;
      std::vector<bool> dropped(p_in.constraints.size(), false);
      for (int d : prep.dropped_rows) dropped[d] = true;
      for (size_t i = 0; i < p_in.constraints.size(); ++i) {
        if (dropped[i]) continue;
        s2.infeasibility_ray[i] = ray[kept] / prep.row_scales[kept];
        ++kept;
      }
      const double rn = linalg::norm2(s2.infeasibility_ray);
      if (rn > 0)
        for (double& t : s2.infeasibility_ray) t /= rn;
      return s2;
    };
    if (iter >= 3 && ynorm >= 1e5 && ynorm >= 4.0 * ynorm_hist[std::max(0, iter - 10)]) {
      if (auto s2 = try_ray(iter)) return *s2;
    }
    if (pres <= 1e-6 && pobj < -1e10 * std::max(1.0, bnorm))
      return finish(SdpStatus::DualInfeasible, "primal objective diverging", iter);

    if (iter == opts.max_iterations) {
      if (auto s2 = try_ray(iter)) return *s2;
      return finish(SdpStatus::MaxIterations, "iteration cap", iter);
    }

    const double mu = gap / K;

    // Nesterov-Todd scaling per block
    std::vector<Mat> LX(nblocks), LS(nblocks), R(nblocks), Rinv(nblocks), W(nblocks);
    std::vector<Vec> lambda(nblocks);
    bool scale_ok = true;
    for (int bidx = 0; bidx < nblocks && scale_ok; ++bidx) {
      const int n = w.dims[bidx];
      LX[bidx] = X[bidx];
      LS[bidx] = S[bidx];
      if (!linalg::cholesky(LX[bidx]) || !linalg::cholesky(LS[bidx])) {
        scale_ok = false;
        break;
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) LX[bidx](i, j) = LS[bidx](i, j) = 0.0;
      // B = LS^T LX ; one-sided Jacobi SVD gives V and singular values
      Mat B = linalg::mat_mul(linalg::transpose(LS[bidx]), LX[bidx]);
      Mat V;
      Vec sigma;
      linalg::jacobi_svd(std::move(B), V, sigma);
      for (double sv : sigma)
        if (!(sv > 0.0) || !std::isfinite(sv)) scale_ok = false;
      if (!scale_ok) break;
      lambda[bidx] = sigma;
      // R = LX V diag(sigma^{-1/2}), Rinv = diag(sigma^{1/2}) V^T LX^{-1}
      Mat r = linalg::mat_mul(LX[bidx], V);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) /= std::sqrt(sigma[j]);
      R[bidx] = r;
      // Rinv = diag(sigma^{1/2}) V^T LX^{-1}
      Mat vt = linalg::transpose(V);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) vt(i, j) *= std::sqrt(sigma[i]);
      linalg::solve_lower_right(LX[bidx], vt);
      Rinv[bidx] = vt;
      W[bidx] = linalg::mat_mul(R[bidx], linalg::transpose(R[bidx]));
    }
    if (!scale_ok) {
      if (auto s2 = try_ray(iter)) return *s2;
      return finish(SdpStatus::NumericalFailure, "iterate lost positive definiteness", iter);
    }

    // Schur complement M_ij = sum_b <A_i, W A_j W>
    Mat M(m, m);
    std::vector<std::vector<Mat>> G(m);
    for (int j = 0; j < m; ++j) {
      G[j].reserve(nblocks);
      for (int bidx = 0; bidx < nblocks; ++bidx) G[j].emplace_back(w.dims[bidx], w.dims[bidx]);
      for (const auto& e : w.A[j]) accumulate_waw(W[e.block], e, G[j][e.block]);
      for (int i = 0; i < m; ++i) M(i, j) = sparse_dot(w.A[i], G[j]);
    }
    linalg::symmetrize(M);
    Mat Mchol = M;
    bool chol_ok = linalg::cholesky(Mchol);
    if (!chol_ok) {
      double jitter = 1e-14;
      double tr = 0.0;
      for (int i = 0; i < m; ++i) tr += M(i, i);
      tr = std::max(tr / std::max(m, 1), 1e-300);
      while (!chol_ok && jitter <= 1e-6) {
        Mchol = M;
        for (int i = 0; i < m; ++i) Mchol(i, i) += jitter * tr;
        chol_ok = linalg::cholesky(Mchol);
        jitter *= 100.0;
      }
      if (!chol_ok) {
        if (auto s2 = try_ray(iter)) return *s2;
        return finish(SdpStatus::NumericalFailure, "Schur complement not positive definite", iter);
      }
    }

    std::vector<Mat> WRdW(nblocks);
    for (int bidx = 0; bidx < nblocks; ++bidx)
      WRdW[bidx] = linalg::mat_mul(W[bidx], linalg::mat_mul(Rd[bidx], W[bidx]));
    const Vec a_wrdw = w.opA(WRdW);

    auto solve_direction = [&](const std::vector<Mat>& V, Vec& dy, std::vector<Mat>& dS,
                               std::vector<Mat>& dX) {
      const Vec a_v = w.opA(V);
      Vec rhs(m);
      for (int i = 0; i < m; ++i) rhs[i] = rp[i] - a_v[i] + a_wrdw[i];
      dy = rhs;
      linalg::chol_solve(Mchol, dy);
      // two rounds of iterative refinement; the Schur system can be badly
      // conditioned when the optimal weight dwarfs the remaining data
      for (int round = 0; round < 2; ++round) {
        Vec resid = rhs;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) resid[i] -= M(i, j) * dy[j];
        linalg::chol_solve(Mchol, resid);
        for (int i = 0; i < m; ++i) dy[i] += resid[i];
      }
      std::vector<Mat> atdy = w.opAt(dy);
      dS.resize(nblocks);
      dX.resize(nblocks);
      for (int bidx = 0; bidx < nblocks; ++bidx) {
        Mat ds = Rd[bidx];
        for (int i = 0; i < ds.rows(); ++i)
          for (int j = 0; j < ds.cols(); ++j) ds(i, j) -= atdy[bidx](i, j);
        linalg::symmetrize(ds);
        Mat wdsw = linalg::mat_mul(W[bidx], linalg::mat_mul(ds, W[bidx]));
        Mat dx = V[bidx];
        for (int i = 0; i < dx.rows(); ++i)
          for (int j = 0; j < dx.cols(); ++j) dx(i, j) -= wdsw(i, j);
        linalg::symmetrize(dx);
        dS[bidx] = std::move(ds);
        dX[bidx] = std::move(dx);
      }
    };

    // predictor (affine scaling direction): target complementarity zero
    std::vector<Mat> Vaff(nblocks);
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      Vaff[bidx] = X[bidx];
      for (auto& t : Vaff[bidx].data()) t = -t;
    }
    Vec dy_a;
    std::vector<Mat> dS_a, dX_a;
    solve_direction(Vaff, dy_a, dS_a, dX_a);

    double ap = 1.0, ad = 1.0;
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      ap = std::min(ap, max_step(LX[bidx], dX_a[bidx]));
      ad = std::min(ad, max_step(LS[bidx], dS_a[bidx]));
    }
    double gap_aff = 0.0;
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      Mat xa = X[bidx], sa = S[bidx];
      for (size_t t = 0; t < xa.data().size(); ++t) {
        xa.data()[t] += ap * dX_a[bidx].data()[t];
        sa.data()[t] += ad * dS_a[bidx].data()[t];
      }
      gap_aff += linalg::dot(xa, sa);
    }
    const double mu_aff = gap_aff / K;
    double sigma_c = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    sigma_c = std::min(1.0, std::max(0.0, sigma_c));

    // corrector: in scaled space solve lambda o (dXt + dSt) = s*mu*I - lambda^2
    //            - sym(dXt_a dSt_a), then map back through R
    std::vector<Mat> Vcorr(nblocks);
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      const int n = w.dims[bidx];
      Mat dxt = linalg::mat_mul(Rinv[bidx], linalg::mat_mul(dX_a[bidx], linalg::transpose(Rinv[bidx])));
      Mat dst = linalg::mat_mul(linalg::transpose(R[bidx]), linalg::mat_mul(dS_a[bidx], R[bidx]));
      Mat prod = linalg::mat_mul(dxt, dst);
      Mat D(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double v = -0.5 * (prod(i, j) + prod(j, i));
          if (i == j) v += sigma_c * mu - lambda[bidx][i] * lambda[bidx][i];
          D(i, j) = 2.0 * v / (lambda[bidx][i] + lambda[bidx][j]);
        }
      }
      Vcorr[bidx] = linalg::mat_mul(R[bidx], linalg::mat_mul(D, linalg::transpose(R[bidx])));
      linalg::symmetrize(Vcorr[bidx]);
    }
    Vec dy;
    std::vector<Mat> dS, dX;
    solve_direction(Vcorr, dy, dS, dX);

    ap = 1.0;
    ad = 1.0;
    for (int bidx = 0; bidx < nblocks; ++bidx) {
      ap = std::min(ap, max_step(LX[bidx], dX[bidx]));
      ad = std::min(ad, max_step(LS[bidx], dS[bidx]));
    }
    ap = std::min(1.0, opts.step_fraction * ap);
    ad = std::min(1.0, opts.step_fraction * ad);
    if (ap < 1e-10 || ad < 1e-10) {
      if (auto s2 = try_ray(iter)) return *s2;
      return finish(SdpStatus::NumericalFailure, "step size below floor", iter);
    }

    for (int bidx = 0; bidx < nblocks; ++bidx) {
      for (size_t t = 0; t < X[bidx].data().size(); ++t) {
        X[bidx].data()[t] += ap * dX[bidx].data()[t];
        S[bidx].data()[t] += ad * dS[bidx].data()[t];
      }
    }
    for (int i = 0; i < m; ++i) y[i] += ad * dy[i];
  }
  return finish(SdpStatus::MaxIterations, "iteration cap", opts.max_iterations);
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) {
  SdpSolution first = solve_once(p, opts);
  if (first.status != SdpStatus::NumericalFailure) return first;
  // one deterministic retry with shorter steps; ill-conditioned endgames
  // sometimes lose positive definiteness only under aggressive stepping
  SdpOptions retry = opts;
  retry.step_fraction = std::min(0.9, opts.step_fraction);
  retry.dump_path.clear();
  SdpSolution second = solve_once(p, retry);
  if (second.status != SdpStatus::NumericalFailure) return second;
  return first;
}

std::string to_text(const SdpProblem& p) {
  std::ostringstream os;
  char buf[64];
  os << "sosnewton-sdp 1\n";
  os << "blocks " << p.block_dims.size();
  for (int n : p.block_dims) os << " " << n;
  os << "\n";
  auto emit = [&](const BlockEntry& e) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    os << e.block << " " << e.row << " " << e.col << " " << buf << "\n";
  };
  os << "objective " << p.objective.size() << "\n";
  for (const auto& e : p.objective) emit(e);
  os << "constraints " << p.constraints.size() << "\n";
  for (size_t i = 0; i < p.constraints.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p.constraints[i].rhs);
    os << "constraint " << i << " " << buf << " " << p.constraints[i].entries.size() << "\n";
    for (const auto& e : p.constraints[i].entries) emit(e);
  }
  return os.str();
}

SdpProblem from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int version = 0;
  is >> tag >> version;
  if (tag != "sosnewton-sdp" || version != 1) throw std::runtime_error("unrecognized sdp text header");
  SdpProblem p;
  size_t nblocks = 0;
  is >> tag >> nblocks;
  if (tag != "blocks") throw std::runtime_error("bad sdp text: expected blocks");
  p.block_dims.resize(nblocks);
  for (auto& n : p.block_dims) is >> n;
  size_t nobj = 0;
  is >> tag >> nobj;
  if (tag != "objective") throw std::runtime_error("bad sdp text: expected objective");
  p.objective.resize(nobj);
  for (auto& e : p.objective) is >> e.block >> e.row >> e.col >> e.value;
  size_t ncons = 0;
  is >> tag >> ncons;
  if (tag != "constraints") throw std::runtime_error("bad sdp text: expected constraints");
  p.constraints.resize(ncons);
  for (size_t i = 0; i < ncons; ++i) {
    size_t idx = 0, count = 0;
    is >> tag >> idx >> p.constraints[i].rhs >> count;
    if (tag != "constraint") throw std::runtime_error("bad sdp text: expected constraint");
    p.constraints[i].entries.resize(count);
    for (auto& e : p.constraints[i].entries) is >> e.block >> e.row >> e.col >> e.value;
  }
  if (!is) throw std::runtime_error("bad sdp text: truncated");
  return p;
}

void write_text_file(const SdpProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open sdp dump file: " + path);
  out << to_text(p);
}

}  // namespace sosnewton::conicsolve
