#pragma once

#include <vector>

namespace sosnewton::linalg {

using Vec = std::vector<double>;

/// Dense row-major matrix. Small sizes only; everything here is O(n^3) dense.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Mat mat_mul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
void symmetrize(Mat& a);
double frob_norm(const Mat& a);
double dot(const Mat& a, const Mat& b);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);

/// In-place Cholesky, lower triangle of `a` becomes L (upper left untouched).
/// Returns false if a pivot drops below `floor` times the largest diagonal.
bool cholesky(Mat& a, double floor = 0.0);

/// Solve L x = b and L^T L ... helpers operating on the lower factor.
void solve_lower(const Mat& l, Vec& x);           // L x = b in place
void solve_lower_transposed(const Mat& l, Vec& x);  // L^T x = b in place
void chol_solve(const Mat& l, Vec& x);            // (L L^T) x = b in place

/// B := L^{-1} B for lower-triangular L (forward substitution on columns).
void solve_lower_matrix(const Mat& l, Mat& b);
/// B := B L^{-1} (right-multiply by the inverse of lower L).
void solve_lower_right(const Mat& l, Mat& b);

/// Gaussian elimination with partial pivoting; throws std::runtime_error on
/// singular systems.
Vec solve_linear(Mat a, Vec b);

/// Cyclic Jacobi eigensolver for symmetric matrices. Rotates until the
/// off-diagonal Frobenius norm is below tol * ||A||_F. Eigenvalues ascending.
/// If evecs is non-null it receives the column eigenvectors.
void jacobi_eigensystem(const Mat& a, Vec& evals, Mat* evecs = nullptr,
                        double tol = 1e-12, int max_sweeps = 64);

double min_eigenvalue_sym(const Mat& a);
double max_eigenvalue_sym(const Mat& a);

/// One-sided (Hestenes) Jacobi SVD. Returns V and the singular values of b;
/// left vectors are not formed. b is destroyed.
void jacobi_svd(Mat b, Mat& v, Vec& sigma, double tol = 1e-14, int max_sweeps = 64);

}  // namespace sosnewton::linalg
