#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sosnewton/conicsolve.hpp"

using namespace sosnewton::conicsolve;
using sosnewton::linalg::Mat;
using sosnewton::linalg::Vec;
namespace linalg = sosnewton::linalg;

namespace {

SdpProblem min_trace_e11() {
  // min <I, X> s.t. X_11 = 1, X (2x2) psd  ->  optimum 1 at X = E_11
  SdpProblem p;
  p.block_dims = {2};
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  SdpConstraint c;
  c.entries = {{0, 0, 0, 1.0}};
  c.rhs = 1.0;
  p.constraints.push_back(c);
  return p;
}

// Gram feasibility system for a univariate quadratic c0 + c1 x + c2 x^2 over
// the basis (1, x): Q00 = c0, 2 Q01 = c1, Q11 = c2.
SdpProblem quadratic_sos_system(double c0, double c1, double c2) {
  SdpProblem p;
  p.block_dims = {2};
  p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.constraints.push_back({{{0, 0, 0, 1.0}}, c0});
  p.constraints.push_back({{{0, 0, 1, 1.0}}, c1});
  p.constraints.push_back({{{0, 1, 1, 1.0}}, c2});
  return p;
}

double min_eig_blocks(const std::vector<Mat>& blocks) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) m = std::min(m, linalg::min_eigenvalue_sym(b));
  return m;
}

}  // namespace

TEST_CASE("linear algebra kernels") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + rep % 5;
    Mat b(n, n);
    for (auto& v : b.data()) v = u(rng);
    // SPD matrix a = b b^T + n I
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = (i == j) ? n : 0.0;
        for (int k = 0; k < n; ++k) s += b(i, k) * b(j, k);
        a(i, j) = s;
      }
    Mat l = a;
    REQUIRE(linalg::cholesky(l));
    Vec x(n), rhs(n);
    for (auto& v : rhs) v = u(rng);
    x = rhs;
    linalg::chol_solve(l, x);
    Vec ax(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ax[i] += a(i, j) * x[j];
    for (int i = 0; i < n; ++i) CHECK(ax[i] == doctest::Approx(rhs[i]).epsilon(1e-9));

    // eigen decomposition reconstructs the matrix
    Vec ev;
    Mat evec;
    linalg::jacobi_eigensystem(a, ev, &evec);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += evec(i, k) * ev[k] * evec(j, k);
        CHECK(s == doctest::Approx(a(i, j)).epsilon(1e-9));
      }

    // svd: B^T B = V S^2 V^T
    Mat v;
    Vec sig;
    linalg::jacobi_svd(b, v, sig);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double btb = 0.0;
        for (int k = 0; k < n; ++k) btb += b(k, i) * b(k, j);
        double rec = 0.0;
        for (int k = 0; k < n; ++k) rec += v(i, k) * sig[k] * sig[k] * v(j, k);
        CHECK(rec == doctest::Approx(btb).epsilon(1e-8));
      }
  }
}

TEST_CASE("minimum-trace projector problem") {
  const SdpSolution sol = solve(min_trace_e11());
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::fabs(sol.X[0](1, 1)) < 1e-6);
  CHECK(std::fabs(sol.X[0](0, 1)) < 1e-6);
  CHECK(sol.primal_res <= 1e-8);
  CHECK(sol.dual_res <= 1e-8);
  CHECK(sol.rel_gap <= 1e-8);
  CHECK(min_eig_blocks(sol.X) >= -1e-9);
  CHECK(min_eig_blocks(sol.S) >= -1e-9);
  // weak duality at the exit
  CHECK(sol.primal_obj >= sol.dual_obj - 1e-7 * std::max(1.0, std::fabs(sol.primal_obj)));
}

TEST_CASE("sos feasibility of x^2+1 and infeasibility of x^2-1") {
  const SdpSolution feas = solve(quadratic_sos_system(1.0, 0.0, 1.0));
  REQUIRE(feas.status == SdpStatus::Optimal);
  CHECK(feas.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(feas.X[0](1, 1) == doctest::Approx(1.0).epsilon(1e-6));

  const SdpSolution infeas = solve(quadratic_sos_system(-1.0, 0.0, 1.0));
  REQUIRE(infeas.status == SdpStatus::PrimalInfeasible);
  // certificate: sum y_i b_i > 0 and -sum y_i A_i psd (to the eigenvalue floor)
  const Vec& ray = infeas.infeasibility_ray;
  REQUIRE(ray.size() == 3);
  const double bty = -1.0 * ray[0] + 0.0 * ray[1] + 1.0 * ray[2];
  CHECK(bty > 0.0);
  Mat z(2, 2);
  z(0, 0) = ray[0];
  z(0, 1) = z(1, 0) = ray[1];
  z(1, 1) = ray[2];
  CHECK(linalg::max_eigenvalue_sym(z) <= 1e-9);
}

TEST_CASE("eigenvalue problem: min <C,X> with tr X = 1") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + rep % 4;
    Mat c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) c(i, j) = c(j, i) = u(rng);
    SdpProblem p;
    p.block_dims = {n};
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (c(i, j) != 0.0) p.objective.push_back({0, i, j, c(i, j)});
    SdpConstraint tr;
    for (int i = 0; i < n; ++i) tr.entries.push_back({0, i, i, 1.0});
    tr.rhs = 1.0;
    p.constraints.push_back(tr);
    const SdpSolution sol = solve(p);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(linalg::min_eigenvalue_sym(c)).epsilon(1e-6));
  }
}

TEST_CASE("random primal-dual feasible block problems solve to tolerance") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 12; ++rep) {
    const std::vector<int> dims = (rep % 3 == 0) ? std::vector<int>{3, 2}
                                 : (rep % 3 == 1) ? std::vector<int>{4}
                                                  : std::vector<int>{2, 1, 3};
    const int m = 3 + rep % 4;
    SdpProblem p;
    p.block_dims = dims;

    // X0, S0 strictly feasible; b = A(X0); C = S0 + At(y0)
    std::vector<Mat> X0, S0;
    for (int n : dims) {
      Mat bx(n, n), bs(n, n);
      for (auto& v : bx.data()) v = u(rng);
      for (auto& v : bs.data()) v = u(rng);
      Mat xx(n, n), ss(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double sx = (i == j) ? 0.5 : 0.0, ssum = (i == j) ? 0.5 : 0.0;
          for (int k = 0; k < n; ++k) {
            sx += bx(i, k) * bx(j, k);
            ssum += bs(i, k) * bs(j, k);
          }
          xx(i, j) = sx;
          ss(i, j) = ssum;
        }
      X0.push_back(xx);
      S0.push_back(ss);
    }
    Vec y0(m);
    for (auto& v : y0) v = u(rng);

    std::vector<SdpConstraint> cons(m);
    for (int i = 0; i < m; ++i) {
      for (int b = 0; b < static_cast<int>(dims.size()); ++b)
        for (int r = 0; r < dims[b]; ++r)
          for (int c2 = r; c2 < dims[b]; ++c2)
            if (std::fabs(u(rng)) > 0.4) cons[i].entries.push_back({b, r, c2, u(rng)});
      if (cons[i].entries.empty()) cons[i].entries.push_back({0, 0, 0, 1.0});
    }
    // rhs from X0; objective from S0 + At(y0)
    std::vector<Mat> aty(dims.size());
    for (size_t b = 0; b < dims.size(); ++b) aty[b] = Mat(dims[b], dims[b]);
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (const auto& e : cons[i].entries) {
        dot += (e.row == e.col ? 1.0 : 2.0) * e.value * X0[e.block](e.row, e.col);
        aty[e.block](e.row, e.col) += y0[i] * e.value;
        if (e.row != e.col) aty[e.block](e.col, e.row) += y0[i] * e.value;
      }
      cons[i].rhs = dot;
    }
    p.constraints = cons;
    for (size_t b = 0; b < dims.size(); ++b)
      for (int r = 0; r < dims[b]; ++r)
        for (int c2 = r; c2 < dims[b]; ++c2) {
          const double v = S0[b](r, c2) + aty[b](r, c2);
          if (v != 0.0) p.objective.push_back({static_cast<int>(b), r, c2, v});
        }

    const SdpSolution sol = solve(p);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_res <= 1e-8);
    CHECK(sol.dual_res <= 1e-8);
    CHECK(sol.rel_gap <= 1e-8);
    CHECK(min_eig_blocks(sol.X) >= -1e-9);
    CHECK(min_eig_blocks(sol.S) >= -1e-9);
    CHECK(sol.primal_obj >= sol.dual_obj - 1e-7 * std::max(1.0, std::fabs(sol.primal_obj)));
  }
}

TEST_CASE("determinism: identical problems give identical runs") {
  const SdpProblem p = min_trace_e11();
  const SdpSolution a = solve(p);
  const SdpSolution b = solve(p);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.X.size() == b.X.size());
  for (size_t i = 0; i < a.X.size(); ++i)
    for (size_t t = 0; t < a.X[i].data().size(); ++t)
      CHECK(std::fabs(a.X[i].data()[t] - b.X[i].data()[t]) <= 1e-12);
  for (size_t i = 0; i < a.y.size(); ++i) CHECK(std::fabs(a.y[i] - b.y[i]) <= 1e-12);
}

TEST_CASE("presolve") {
  SdpProblem p = min_trace_e11();
  // duplicated row
  p.constraints.push_back(p.constraints[0]);
  PresolveReport rep;
  const SdpProblem q = presolve(p, rep);
  CHECK(q.constraints.size() == 1);
  REQUIRE(rep.dropped_rows.size() == 1);
  CHECK(rep.dropped_rows[0] == 1);
  CHECK(!rep.infeasible);
  CHECK(!rep.note.empty());

  // scaled duplicate with consistent rhs is dropped too
  SdpProblem p2 = min_trace_e11();
  SdpConstraint scaled;
  scaled.entries = {{0, 0, 0, 2.0}};
  scaled.rhs = 2.0;
  p2.constraints.push_back(scaled);
  const SdpProblem q2 = presolve(p2, rep);
  CHECK(q2.constraints.size() == 1);
  CHECK(!rep.infeasible);

  // inconsistent dependent row flags infeasibility
  SdpProblem p3 = min_trace_e11();
  scaled.rhs = 3.0;
  p3.constraints.push_back(scaled);
  presolve(p3, rep);
  CHECK(rep.infeasible);

  // zero row with nonzero rhs flags infeasibility
  SdpProblem p4 = min_trace_e11();
  SdpConstraint zero;
  zero.rhs = 1.0;
  p4.constraints.push_back(zero);
  presolve(p4, rep);
  CHECK(rep.infeasible);
  const SdpSolution sol = solve(p4);
  CHECK(sol.status == SdpStatus::PrimalInfeasible);

  // already-clean problem passes through with unit scaling only
  const SdpProblem clean = min_trace_e11();
  const SdpProblem qc = presolve(clean, rep);
  CHECK(rep.dropped_rows.empty());
  CHECK(qc.constraints.size() == clean.constraints.size());
  REQUIRE(rep.row_scales.size() == 1);
  CHECK(rep.row_scales[0] == doctest::Approx(1.0));

  // multipliers of dropped rows come back as zeros
  const SdpSolution s2 = solve(p2);
  REQUIRE(s2.status == SdpStatus::Optimal);
  REQUIRE(s2.y.size() == 2);
  CHECK(s2.y[1] == 0.0);
}

TEST_CASE("text dump round trip") {
  SdpProblem p = min_trace_e11();
  p.block_dims.push_back(1);
  p.constraints[0].entries.push_back({1, 0, 0, -0.25});
  const std::string text = to_text(p);
  const SdpProblem q = from_text(text);
  CHECK(to_text(q) == text);
  CHECK(q.block_dims == p.block_dims);
  REQUIRE(q.constraints.size() == p.constraints.size());
  CHECK(q.constraints[0].rhs == p.constraints[0].rhs);
  CHECK(q.constraints[0].entries.size() == p.constraints[0].entries.size());
  CHECK_THROWS(from_text("not a dump"));
}
