#include "sosnewton/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sosnewton::linalg {

Mat mat_mul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void symmetrize(Mat& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
}

double frob_norm(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double dot(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

bool cholesky(Mat& a, double floor) {
  const int n = a.rows();
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) dmax = std::max(dmax, std::fabs(a(i, i)));
  const double cutoff = floor * std::max(dmax, 1.0);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > cutoff) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  return true;
}

void solve_lower(const Mat& l, Vec& x) {
  const int n = l.rows();
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
}

void solve_lower_transposed(const Mat& l, Vec& x) {
  const int n = l.rows();
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
}

void chol_solve(const Mat& l, Vec& x) {
  solve_lower(l, x);
  solve_lower_transposed(l, x);
}

void solve_lower_matrix(const Mat& l, Mat& b) {
  const int n = l.rows();
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < n; ++i) {
      double s = b(i, j);
      for (int k = 0; k < i; ++k) s -= l(i, k) * b(k, j);
      b(i, j) = s / l(i, i);
    }
  }
}

void solve_lower_right(const Mat& l, Mat& b) {
  // Row-wise: z L = b_row, so z_j = (b_j - sum_{k>j} z_k L(k,j)) / L(j,j).
  const int n = l.rows();
  for (int i = 0; i < b.rows(); ++i) {
    for (int j = n - 1; j >= 0; --j) {
      double s = b(i, j);
      for (int k = j + 1; k < n; ++k) s -= b(i, k) * l(k, j);
      b(i, j) = s / l(j, j);
    }
  }
}

void solve_lower_transposed_right(const Mat& l, Mat& b) {
  // b := b L^{-T}; column j of result solves (row-wise forward substitution).
  const int n = l.rows();
  for (int i = 0; i < b.rows(); ++i) {
    for (int j = 0; j < n; ++j) {
      double s = b(i, j);
      for (int k = 0; k < j; ++k) s -= b(i, k) * l(j, k);
      b(i, j) = s / l(j, j);
    }
  }
}

Vec solve_linear(Mat a, Vec b) {
  const int n = a.rows();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::fabs(a(col, col));
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > best) {
        best = std::fabs(a(r, col));
        piv = r;
      }
    }
    if (best < 1e-300 || !std::isfinite(best)) throw std::runtime_error("singular linear system");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

namespace {

double offdiag_norm(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

void jacobi_eigensystem(const Mat& a_in, Vec& evals, Mat* evecs, double tol, int max_sweeps) {
  Mat a = a_in;
  const int n = a.rows();
  Mat v = Mat::identity(n);
  const double anorm = std::max(frob_norm(a), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(a) <= tol * anorm) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  evals.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vec diag(n);
  for (int i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });
  for (int i = 0; i < n; ++i) evals[i] = diag[order[i]];
  if (evecs) {
    *evecs = Mat(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) (*evecs)(i, j) = v(i, order[j]);
  }
}

double min_eigenvalue_sym(const Mat& a) {
  Vec ev;
  jacobi_eigensystem(a, ev);
  return ev.empty() ? 0.0 : ev.front();
}

double max_eigenvalue_sym(const Mat& a) {
  Vec ev;
  jacobi_eigensystem(a, ev);
  return ev.empty() ? 0.0 : ev.back();
}

void jacobi_svd(Mat b, Mat& v, Vec& sigma, double tol, int max_sweeps) {
  const int n = b.cols();
  const int m = b.rows();
  v = Mat::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int k = 0; k < m; ++k) {
          app += b(k, p) * b(k, p);
          aqq += b(k, q) * b(k, q);
          apq += b(k, p) * b(k, q);
        }
        if (std::fabs(apq) <= tol * std::sqrt(app * aqq) + 1e-300) continue;
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        double t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < m; ++k) {
          const double bkp = b(k, p), bkq = b(k, q);
          b(k, p) = c * bkp - s * bkq;
          b(k, q) = s * bkp + c * bkq;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    if (!rotated) break;
  }
  sigma.resize(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += b(k, j) * b(k, j);
    sigma[j] = std::sqrt(s);
  }
}

}  // namespace sosnewton::linalg
