#include "sosnewton/jets.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace sosnewton::jets {

using polycore::monomial_basis;

struct Jet::Table {
  int dim;
  int order;
  std::vector<MultiIndex> basis;

  int find(const MultiIndex& m) const {
    auto it = std::lower_bound(basis.begin(), basis.end(), m);
    if (it == basis.end() || !(*it == m)) return -1;
    return static_cast<int>(it - basis.begin());
  }
};

namespace {

std::shared_ptr<const Jet::Table> table_for(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const Jet::Table>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<Jet::Table>();
  t->dim = dim;
  t->order = order;
  t->basis = monomial_basis(dim, order);
  cache.emplace(key, t);
  return t;
}

}  // namespace

Jet::Jet(int dim, int order, std::shared_ptr<const Table> table)
    : table_(std::move(table)), dim_(dim), order_(order), coeffs_(table_->basis.size(), 0.0) {}

Jet::Jet(int dim, int order) : Jet(dim, order, table_for(dim, order)) {
  if (dim < 1 || order < 0) throw std::invalid_argument("jet requires dim >= 1, order >= 0");
}

Jet Jet::constant(int dim, int order, double c) {
  Jet j(dim, order);
  j.coeffs_[0] = c;
  return j;
}

Jet Jet::variable(int dim, int order, int var, double center) {
  Jet j(dim, order);
  j.coeffs_[0] = center;
  if (order >= 1) {
    const int idx = j.table_->find(MultiIndex::unit(dim, var));
    j.coeffs_[idx] = 1.0;
  }
  return j;
}

double Jet::coeff(const MultiIndex& m) const {
  const int idx = table_->find(m);
  return idx < 0 ? 0.0 : coeffs_[idx];
}

const std::vector<MultiIndex>& Jet::basis() const { return table_->basis; }

Jet Jet::truncated(int new_order) const {
  if (new_order >= order_) return *this;
  Jet r(dim_, new_order);
  for (size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] = coeffs_[i];
  return r;  // relies on shared graded-lex prefix of the two bases
}

Jet Jet::operator+(const Jet& other) const {
  if (dim_ != other.dim_ || order_ != other.order_)
    throw std::invalid_argument("jet arithmetic requires matching dim and order");
  Jet r = *this;
  for (size_t i = 0; i < coeffs_.size(); ++i) r.coeffs_[i] += other.coeffs_[i];
  return r;
}

Jet Jet::operator-(const Jet& other) const {
  if (dim_ != other.dim_ || order_ != other.order_)
    throw std::invalid_argument("jet arithmetic requires matching dim and order");
  Jet r = *this;
  for (size_t i = 0; i < coeffs_.size(); ++i) r.coeffs_[i] -= other.coeffs_[i];
  return r;
}

Jet Jet::operator*(const Jet& other) const {
  if (dim_ != other.dim_ || order_ != other.order_)
    throw std::invalid_argument("jet arithmetic requires matching dim and order");
  Jet r(dim_, order_, table_);
  const auto& basis = table_->basis;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    const double ci = coeffs_[i];
    if (ci == 0.0) continue;
    const int di = basis[i].degree();
    for (size_t j = 0; j < other.coeffs_.size(); ++j) {
      const double cj = other.coeffs_[j];
      if (cj == 0.0) continue;
      if (di + basis[j].degree() > order_) continue;
      const int idx = table_->find(basis[i].plus(basis[j]));
      r.coeffs_[idx] += ci * cj;
    }
  }
  return r;
}

Jet Jet::operator+(double s) const {
  Jet r = *this;
  r.coeffs_[0] += s;
  return r;
}

Jet Jet::operator-(double s) const { return *this + (-s); }

Jet Jet::operator*(double s) const {
  Jet r = *this;
  for (double& c : r.coeffs_) c *= s;
  return r;
}

Vec Jet::grad() const {
  Vec g(dim_);
  for (int i = 0; i < dim_; ++i) g[i] = coeff(MultiIndex::unit(dim_, i));
  return g;
}

Mat Jet::hess() const {
  if (order_ < 2) throw std::invalid_argument("hessian requires a jet of order >= 2");
  Mat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      const MultiIndex m = MultiIndex::unit(dim_, i).plus(MultiIndex::unit(dim_, j));
      const double c = coeff(m);
      const double v = (i == j) ? 2.0 * c : c;
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

Jet jet_powi(const Jet& a, int k) {
  if (k < 0) throw std::invalid_argument("jet_powi: negative exponent");
  Jet r = Jet::constant(a.dim(), a.order(), 1.0);
  Jet base = a;
  int e = k;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

/// Horner evaluation of sum_k series[k] * (inner - inner.value())^k.
Jet jet_compose(const Jet& inner, const std::vector<double>& series) {
  const int d = inner.order();
  Jet v = inner;
  v.coeffs_[0] = 0.0;  // nilpotent part
  Jet r = Jet::constant(inner.dim(), d, series[d]);
  for (int k = d - 1; k >= 0; --k) r = r * v + series[k];
  return r;
}

Jet jet_div(const Jet& a, const Jet& b) {
  const double c = b.value();
  if (c == 0.0) throw std::domain_error("jet_div: zero constant term in divisor");
  const int d = b.order();
  std::vector<double> series(d + 1);  // derivatives of 1/x at c, divided by k!
  double v = 1.0 / c;
  for (int k = 0; k <= d; ++k) {
    series[k] = v;
    v *= -1.0 / c;
  }
  return a * jet_compose(b, series);
}

Jet jet_sqrt(const Jet& a) {
  const double c = a.value();
  if (!(c > 0.0)) throw std::domain_error("jet_sqrt: constant term must be positive");
  const int d = a.order();
  std::vector<double> series(d + 1);
  series[0] = std::sqrt(c);
  for (int k = 1; k <= d; ++k)
    series[k] = series[k - 1] * (0.5 - (k - 1)) / (static_cast<double>(k) * c);
  return jet_compose(a, series);
}

Jet jet_log(const Jet& a) {
  const double c = a.value();
  if (!(c > 0.0)) throw std::domain_error("jet_log: constant term must be positive");
  const int d = a.order();
  std::vector<double> series(d + 1);
  series[0] = std::log(c);
  double p = 1.0 / c;
  for (int k = 1; k <= d; ++k) {
    series[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
    p /= c;
  }
  return jet_compose(a, series);
}

Jet jet_atan(const Jet& a) {
  const double c = a.value();
  const int d = a.order();
  // atan(c+v) = atan(c) + integral of 1/(1+(c+v)^2); the reciprocal series of
  // the quadratic (1+c^2) + 2c v + v^2 gives the integrand's coefficients.
  std::vector<double> series(d + 1);
  series[0] = std::atan(c);
  if (d >= 1) {
    const double q0 = 1.0 + c * c;
    const double q1 = 2.0 * c;
    std::vector<double> r(d);  // reciprocal series to order d-1
    r[0] = 1.0 / q0;
    for (int k = 1; k < d; ++k) {
      double s = q1 * r[k - 1];
      if (k >= 2) s += r[k - 2];  // q2 == 1
      r[k] = -s / q0;
    }
    for (int k = 1; k <= d; ++k) series[k] = r[k - 1] / k;
  }
  return jet_compose(a, series);
}

double value_at(const FunctionOracle& f, const Vec& x) { return f.jet_at(x, 0).value(); }

Vec grad_at(const FunctionOracle& f, const Vec& x) { return f.jet_at(x, 1).grad(); }

Mat hess_at(const FunctionOracle& f, const Vec& x) { return f.jet_at(x, 2).hess(); }

double min_eig_hessian(const FunctionOracle& f, const Vec& x) {
  return linalg::min_eigenvalue_sym(hess_at(f, x));
}

Polynomial taylor_centered(const FunctionOracle& f, const Vec& xbar, int d) {
  if (d < 0) throw std::invalid_argument("taylor order must be nonnegative");
  const Jet j = f.jet_at(xbar, d);
  Polynomial p(f.dim);
  const auto& basis = j.basis();
  for (size_t i = 0; i < basis.size(); ++i) p.add_term(basis[i], j.coeffs()[i]);
  return p;
}

Polynomial taylor_expand(const FunctionOracle& f, const Vec& xbar, int d) {
  Vec neg(xbar.size());
  for (size_t i = 0; i < xbar.size(); ++i) neg[i] = -xbar[i];
  return taylor_centered(f, xbar, d).translate(neg);
}

namespace {

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

double spectral_norm_sym(const Mat& a) {
  Vec ev;
  linalg::jacobi_eigensystem(a, ev);
  double m = 0.0;
  for (double v : ev) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

RemainderReport remainder_check(const FunctionOracle& f, const Vec& xbar, int d,
                                const std::vector<Vec>& samples, double lipschitz_bound,
                                double tol) {
  if (!(lipschitz_bound >= 0.0) || !std::isfinite(lipschitz_bound))
    throw std::invalid_argument("remainder_check: invalid Lipschitz bound");
  const Polynomial taylor = taylor_expand(f, xbar, d);
  RemainderReport rep;
  rep.min_grad_slack = std::numeric_limits<double>::infinity();
  rep.min_hess_slack = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (const Vec& x : samples) {
    Vec diff(x.size());
    for (size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - xbar[i];
    const double dist = linalg::norm2(diff);

    Vec gr = grad_at(f, x);
    const Vec gt = taylor.eval_grad(x);
    for (size_t i = 0; i < gr.size(); ++i) gr[i] -= gt[i];
    const double grad_bound = lipschitz_bound / factorial(d) * std::pow(dist, d);
    rep.min_grad_slack = std::min(rep.min_grad_slack, grad_bound - linalg::norm2(gr));

    Mat hr = hess_at(f, x);
    const Mat ht = taylor.eval_hess(x);
    for (int i = 0; i < hr.rows(); ++i)
      for (int j = 0; j < hr.cols(); ++j) hr(i, j) -= ht(i, j);
    const double hess_bound = lipschitz_bound / factorial(d - 1) * std::pow(dist, d - 1);
    rep.min_hess_slack = std::min(rep.min_hess_slack, hess_bound - spectral_norm_sym(hr));

    scale = std::max({scale, grad_bound, hess_bound});
  }
  rep.ok = rep.min_grad_slack >= -tol * scale && rep.min_hess_slack >= -tol * scale;
  return rep;
}

FunctionOracle make_sqrt1() {
  FunctionOracle f;
  f.name = "sqrt1";
  f.dim = 1;
  f.jet_at = [](const Vec& xbar, int order) {
    const Jet x = Jet::variable(1, order, 0, xbar.at(0));
    return jet_sqrt(x * x + 1.0) - 1.0;
  };
  f.lipschitz[3] = 3.0;  // max of |f''''| = |(12x^2-3)(x^2+1)^{-7/2}|, attained at 0
  f.minimizer = Vec{0.0};
  return f;
}

FunctionOracle make_atan1() {
  FunctionOracle f;
  f.name = "atan1";
  f.dim = 1;
  f.jet_at = [](const Vec& xbar, int order) {
    const Jet x = Jet::variable(1, order, 0, xbar.at(0));
    return 2.0 * x * jet_atan(x) - jet_log(x * x + 1.0) + x * x * 0.1;
  };
  f.lipschitz[3] = 4.0;  // max of |f''''| = |4(3x^2-1)(1+x^2)^{-3}|, attained at 0
  f.minimizer = Vec{0.0};
  return f;
}

const Polynomial& beale_polynomial() {
  static const Polynomial beale = [] {
    const Polynomial x1 = Polynomial::variable(2, 0);
    const Polynomial x2 = Polynomial::variable(2, 1);
    const Polynomial one = Polynomial::constant(2, 1.0);
    const Polynomial t1 = one * 1.5 - x1 + x1 * x2;
    const Polynomial t2 = one * 2.25 - x1 + x1 * x2 * x2;
    const Polynomial t3 = one * 2.625 - x1 + x1 * x2 * x2 * x2;
    return t1 * t1 + t2 * t2 + t3 * t3;
  }();
  return beale;
}

namespace {

Jet polynomial_jet(const Polynomial& p, const Vec& xbar, int order) {
  const int n = p.dim();
  std::vector<Jet> vars;
  vars.reserve(n);
  for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(n, order, i, xbar.at(i)));
  Jet acc = Jet::constant(n, order, 0.0);
  for (const auto& [m, c] : p.terms()) {
    Jet term = Jet::constant(n, order, c);
    for (int v = 0; v < n; ++v)
      if (m[v] > 0) term = term * jet_powi(vars[v], m[v]);
    acc = acc + term;
  }
  return acc;
}

}  // namespace

FunctionOracle oracle_from_polynomial(std::string name, Polynomial p, std::optional<Vec> minimizer) {
  FunctionOracle f;
  f.name = std::move(name);
  f.dim = p.dim();
  f.minimizer = std::move(minimizer);
  f.jet_at = [poly = std::move(p)](const Vec& xbar, int order) {
    return polynomial_jet(poly, xbar, order);
  };
  return f;
}

FunctionOracle make_beale() {
  return oracle_from_polynomial("beale", beale_polynomial(), Vec{3.0, 0.5});
}

std::optional<FunctionOracle> find_builtin(const std::string& name) {
  if (name == "sqrt1") return make_sqrt1();
  if (name == "atan1") return make_atan1();
  if (name == "beale") return make_beale();
  return std::nullopt;
}

}  // namespace sosnewton::jets
