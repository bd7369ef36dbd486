#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosnewton/polycore.hpp"

namespace sosnewton::jets {

using linalg::Mat;
using linalg::Vec;
using polycore::MultiIndex;
using polycore::Polynomial;

/// Truncated multivariate Taylor series about a fixed expansion point.
/// Coefficients are stored against the graded-lex monomial basis in the
/// offset variable u = x - xbar; coeff(alpha) equals the Taylor coefficient
/// (1/alpha!) * d^alpha f(xbar).
class Jet {
 public:
  Jet(int dim, int order);
  static Jet constant(int dim, int order, double c);
  /// center + u_var: the coordinate function x_var expanded at center.
  static Jet variable(int dim, int order, int var, double center);

  int dim() const { return dim_; }
  int order() const { return order_; }
  double value() const { return coeffs_[0]; }
  double coeff(const MultiIndex& m) const;
  const std::vector<double>& coeffs() const { return coeffs_; }
  const std::vector<MultiIndex>& basis() const;

  Jet truncated(int new_order) const;

  Jet operator+(const Jet& other) const;
  Jet operator-(const Jet& other) const;
  Jet operator*(const Jet& other) const;
  Jet operator+(double s) const;
  Jet operator-(double s) const;
  Jet operator*(double s) const;

  /// Gradient of the underlying function at the expansion point.
  Vec grad() const;
  /// Hessian at the expansion point (requires order >= 2).
  Mat hess() const;

  struct Table;  // shared per-(dim, order) monomial table

 private:
  Jet(int dim, int order, std::shared_ptr<const Table> table);
  std::shared_ptr<const Table> table_;
  int dim_ = 0;
  int order_ = 0;
  std::vector<double> coeffs_;

  friend Jet jet_compose(const Jet& inner, const std::vector<double>& series);
};

inline Jet operator+(double s, const Jet& j) { return j + s; }
inline Jet operator*(double s, const Jet& j) { return j * s; }

Jet jet_powi(const Jet& a, int k);
Jet jet_div(const Jet& a, const Jet& b);  // constant term of b must be nonzero
Jet jet_sqrt(const Jet& a);               // constant term must be positive
Jet jet_log(const Jet& a);                // constant term must be positive
Jet jet_atan(const Jet& a);

/// A smooth objective exposed through its Taylor-jet oracle. The evaluator is
/// pure and may be called concurrently.
struct FunctionOracle {
  std::string name;
  int dim = 0;
  std::function<Jet(const Vec& xbar, int order)> jet_at;
  /// order d -> known upper bound on the Lipschitz constant of grad^d f.
  std::map<int, double> lipschitz;
  std::optional<Vec> minimizer;
};

double value_at(const FunctionOracle& f, const Vec& x);
Vec grad_at(const FunctionOracle& f, const Vec& x);
Mat hess_at(const FunctionOracle& f, const Vec& x);

/// Smallest eigenvalue of the Hessian at x (cyclic Jacobi).
double min_eig_hessian(const FunctionOracle& f, const Vec& x);

/// Order-d Taylor polynomial of f at xbar, in the original coordinates.
Polynomial taylor_expand(const FunctionOracle& f, const Vec& xbar, int d);
/// Same expansion but in the offset variable u = x - xbar.
Polynomial taylor_centered(const FunctionOracle& f, const Vec& xbar, int d);

struct RemainderReport {
  bool ok = false;
  double min_grad_slack = 0.0;  // min over samples of bound - ||grad R||
  double min_hess_slack = 0.0;  // min over samples of bound - ||hess R||
};

/// Checks the Taylor remainder bounds ||grad R|| <= (L/d!)*||x-xbar||^d and
/// ||hess R|| <= (L/(d-1)!)*||x-xbar||^(d-1) at each sample.
RemainderReport remainder_check(const FunctionOracle& f, const Vec& xbar, int d,
                                const std::vector<Vec>& samples, double lipschitz_bound,
                                double tol = 1e-9);

// Built-in test functions.
FunctionOracle make_sqrt1();  // sqrt(x^2+1) - 1
FunctionOracle make_atan1();  // 2x*atan(x) - log(1+x^2) + x^2/10
FunctionOracle make_beale();
const Polynomial& beale_polynomial();

FunctionOracle oracle_from_polynomial(std::string name, Polynomial p,
                                      std::optional<Vec> minimizer = std::nullopt);

/// Lookup by built-in name; nullopt if unknown.
std::optional<FunctionOracle> find_builtin(const std::string& name);

}  // namespace sosnewton::jets
