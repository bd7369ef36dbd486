#pragma once

#include <map>
#include <string>
#include <vector>

#include "sosnewton/linalg.hpp"

namespace sosnewton::polycore {

using linalg::Mat;
using linalg::Vec;

/// Exponent vector of one monomial; length equals the ambient dimension.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exps);
  static MultiIndex zero(int n);
  static MultiIndex unit(int n, int var);

  int dim() const { return static_cast<int>(exps_.size()); }
  int degree() const;
  int operator[](int i) const { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  MultiIndex plus(const MultiIndex& other) const;

  bool operator==(const MultiIndex& other) const { return exps_ == other.exps_; }
  bool operator!=(const MultiIndex& other) const { return exps_ != other.exps_; }
  /// Graded lexicographic: ascending total degree, ties broken
  /// lexicographically on the exponent vector.
  bool operator<(const MultiIndex& other) const;

 private:
  std::vector<int> exps_;
};

/// All monomials of n variables with total degree <= k, graded-lex ascending.
/// Size is C(n+k, k); index 0 is the constant monomial.
std::vector<MultiIndex> monomial_basis(int n, int k);

long long binomial(int n, int k);

/// Dense-by-monomial multivariate polynomial with double coefficients.
/// Terms with coefficient exactly 0.0 are never stored.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}
  static Polynomial constant(int dim, double c);
  static Polynomial variable(int dim, int var);

  int dim() const { return dim_; }
  int degree() const;  // 0 for the zero polynomial
  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }

  double coeff(const MultiIndex& m) const;
  void add_term(const MultiIndex& m, double c);
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial& operator+=(const Polynomial& other);

  Polynomial differentiate(int var) const;
  std::vector<Polynomial> gradient() const;

  /// q with q(x) = p(x + a), by exact binomial expansion.
  Polynomial translate(const Vec& a) const;

  /// q with q(x) = p(rho * x).
  Polynomial dilate(double rho) const;

  /// Drop all terms of total degree > k.
  Polynomial truncate(int k) const;

  double eval(const Vec& x) const;
  Vec eval_grad(const Vec& x) const;
  Mat eval_hess(const Vec& x) const;  // exactly symmetric

  double max_abs_coeff() const;

  std::string to_json() const;
  static Polynomial from_json(const std::string& text);

 private:
  int dim_ = 0;
  std::map<MultiIndex, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

/// Symmetric when produced by hessian(); entries share dim.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols, int dim)
      : rows_(rows), cols_(cols), entries_(static_cast<size_t>(rows) * cols, Polynomial(dim)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Polynomial& at(int i, int j) { return entries_[static_cast<size_t>(i) * cols_ + j]; }
  const Polynomial& at(int i, int j) const { return entries_[static_cast<size_t>(i) * cols_ + j]; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Polynomial> entries_;
};

PolyMatrix hessian(const Polynomial& p);

/// (sum_i (x_i - c_i)^2)^(m/2); m must be even and >= 2.
Polynomial even_norm_power(int n, const Vec& c, int m);

}  // namespace sosnewton::polycore
