#include "sosnewton/polycore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sosnewton::polycore {

MultiIndex::MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_)
    if (e < 0) throw std::invalid_argument("negative exponent in multi-index");
}

MultiIndex MultiIndex::zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

MultiIndex MultiIndex::unit(int n, int var) {
  std::vector<int> e(n, 0);
  e.at(var) = 1;
  return MultiIndex(std::move(e));
}

int MultiIndex::degree() const {
  int d = 0;
  for (int e : exps_) d += e;
  return d;
}

MultiIndex MultiIndex::plus(const MultiIndex& other) const {
  std::vector<int> e(exps_.size());
  for (size_t i = 0; i < exps_.size(); ++i) e[i] = exps_[i] + other.exps_[i];
  return MultiIndex(std::move(e));
}

bool MultiIndex::operator<(const MultiIndex& other) const {
  const int da = degree(), db = other.degree();
  if (da != db) return da < db;
  return std::lexicographical_compare(exps_.begin(), exps_.end(), other.exps_.begin(),
                                      other.exps_.end());
}

std::vector<MultiIndex> monomial_basis(int n, int k) {
  if (n < 1 || k < 0) throw std::invalid_argument("monomial_basis requires n >= 1, k >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> cur(n, 0);
  // Enumerate all exponent tuples with total degree <= k, then sort graded-lex.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n) {
      out.emplace_back(cur);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      cur[pos] = e;
      self(self, pos + 1, remaining - e);
    }
    cur[pos] = 0;
  };
  rec(rec, 0, k);
  std::sort(out.begin(), out.end());
  return out;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex::zero(dim), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int var) {
  Polynomial p(dim);
  p.add_term(MultiIndex::unit(dim, var), 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coeff(const MultiIndex& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& m, double c) {
  if (m.dim() != dim_) throw std::invalid_argument("multi-index dimension mismatch");
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0.0) terms_.erase(it);
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (dim_ != other.dim_) throw std::invalid_argument("polynomial dimension mismatch");
  Polynomial r = *this;
  for (const auto& [m, c] : other.terms_) r.add_term(m, c);
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (dim_ != other.dim_) throw std::invalid_argument("polynomial dimension mismatch");
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  if (dim_ != other.dim_) throw std::invalid_argument("polynomial dimension mismatch");
  Polynomial r = *this;
  for (const auto& [m, c] : other.terms_) r.add_term(m, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (dim_ != other.dim_) throw std::invalid_argument("polynomial dimension mismatch");
  Polynomial r(dim_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : other.terms_) r.add_term(ma.plus(mb), ca * cb);
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(dim_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.add_term(m, c * s);
  return r;
}

Polynomial Polynomial::differentiate(int var) const {
  if (var < 0 || var >= dim_) throw std::invalid_argument("differentiate: variable out of range");
  Polynomial r(dim_);
  for (const auto& [m, c] : terms_) {
    const int e = m[var];
    if (e == 0) continue;
    std::vector<int> exps = m.exponents();
    exps[var] -= 1;
    r.add_term(MultiIndex(std::move(exps)), c * e);
  }
  return r;
}

std::vector<Polynomial> Polynomial::gradient() const {
  std::vector<Polynomial> g;
  g.reserve(dim_);
  for (int i = 0; i < dim_; ++i) g.push_back(differentiate(i));
  return g;
}

Polynomial Polynomial::translate(const Vec& a) const {
  if (static_cast<int>(a.size()) != dim_) throw std::invalid_argument("translate: point dimension mismatch");
  Polynomial r(dim_);
  for (const auto& [m, c] : terms_) {
    // Expand c * prod_i (x_i + a_i)^{e_i} one variable at a time.
    std::map<MultiIndex, double> acc;
    acc.emplace(MultiIndex::zero(dim_), c);
    for (int v = 0; v < dim_; ++v) {
      const int e = m[v];
      if (e == 0) continue;
      std::map<MultiIndex, double> next;
      // Binomial weights for (x_v + a_v)^e.
      std::vector<double> w(e + 1);
      for (int j = 0; j <= e; ++j) w[j] = static_cast<double>(binomial(e, j)) * std::pow(a[v], e - j);
      for (const auto& [mm, cc] : acc) {
        for (int j = 0; j <= e; ++j) {
          if (w[j] == 0.0) continue;
          std::vector<int> exps = mm.exponents();
          exps[v] += j;
          MultiIndex key(std::move(exps));
          next[key] += cc * w[j];
        }
      }
      acc.swap(next);
    }
    for (const auto& [mm, cc] : acc) r.add_term(mm, cc);
  }
  return r;
}

Polynomial Polynomial::dilate(double rho) const {
  Polynomial r(dim_);
  for (const auto& [m, c] : terms_) r.add_term(m, c * std::pow(rho, m.degree()));
  return r;
}

Polynomial Polynomial::truncate(int k) const {
  Polynomial r(dim_);
  for (const auto& [m, c] : terms_)
    if (m.degree() <= k) r.add_term(m, c);
  return r;
}

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

double Polynomial::eval(const Vec& x) const {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("eval: point dimension mismatch");
  double s = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int v = 0; v < dim_; ++v) t *= ipow(x[v], m[v]);
    s += t;
  }
  return s;
}

Vec Polynomial::eval_grad(const Vec& x) const {
  Vec g(dim_);
  for (int i = 0; i < dim_; ++i) g[i] = differentiate(i).eval(x);
  return g;
}

Mat Polynomial::eval_hess(const Vec& x) const {
  Mat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    const Polynomial di = differentiate(i);
    for (int j = i; j < dim_; ++j) {
      const double v = di.differentiate(j).eval(x);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mi, c] : terms_) m = std::max(m, std::fabs(c));
  return m;
}

std::string Polynomial::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : terms_) {  // std::map iterates in graded-lex order
    nlohmann::json t;
    t["exp"] = m.exponents();
    t["coef"] = c;
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j.dump();
}

Polynomial Polynomial::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int dim = j.at("dim").get<int>();
  if (dim < 1) throw std::invalid_argument("polynomial json: dim must be positive");
  Polynomial p(dim);
  for (const auto& t : j.at("terms")) {
    std::vector<int> exps = t.at("exp").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != dim)
      throw std::invalid_argument("polynomial json: exponent length mismatch");
    p.add_term(MultiIndex(std::move(exps)), t.at("coef").get<double>());
  }
  return p;
}

PolyMatrix hessian(const Polynomial& p) {
  const int n = p.dim();
  PolyMatrix h(n, n, n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = p.differentiate(i);
    for (int j = i; j < n; ++j) {
      Polynomial dij = di.differentiate(j);
      h.at(j, i) = dij;
      h.at(i, j) = std::move(dij);
    }
  }
  return h;
}

Polynomial even_norm_power(int n, const Vec& c, int m) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("even_norm_power: exponent must be even and >= 2");
  if (static_cast<int>(c.size()) != n) throw std::invalid_argument("even_norm_power: center dimension mismatch");
  Polynomial sq(n);
  for (int v = 0; v < n; ++v) {
    Polynomial d = Polynomial::variable(n, v) - Polynomial::constant(n, c[v]);
    sq += d * d;
  }
  Polynomial r = Polynomial::constant(n, 1.0);
  for (int i = 0; i < m / 2; ++i) r = r * sq;
  return r;
}

}  // namespace sosnewton::polycore
