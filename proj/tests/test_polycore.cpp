#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sosnewton/polycore.hpp"

using namespace sosnewton::polycore;
using sosnewton::linalg::Vec;

namespace {

// Brute-force oracle: count exponent tuples of length n with sum <= k.
int count_tuples(int n, int k) {
  if (n == 0) return k >= 0 ? 1 : 0;
  int total = 0;
  for (int e = 0; e <= k; ++e) total += count_tuples(n - 1, k - e);
  return total;
}

Polynomial random_poly(std::mt19937& rng, int dim, int max_deg, int terms) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  Polynomial p(dim);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> e(dim, 0);
    int budget = deg(rng);
    for (int v = 0; v < dim && budget > 0; ++v) {
      std::uniform_int_distribution<int> pick(0, budget);
      e[v] = pick(rng);
      budget -= e[v];
    }
    p.add_term(MultiIndex(e), coef(rng));
  }
  return p;
}

Vec random_point(std::mt19937& rng, int dim, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec x(dim);
  for (double& v : x) v = u(rng);
  return x;
}

Polynomial x_poly(int dim, int var) { return Polynomial::variable(dim, var); }

}  // namespace

TEST_CASE("monomial basis sizes and ordering") {
  auto b1 = monomial_basis(1, 2);
  REQUIRE(b1.size() == 3);
  CHECK(b1[0].degree() == 0);
  CHECK(b1[1][0] == 1);
  CHECK(b1[2][0] == 2);

  CHECK(monomial_basis(2, 2).size() == 6);
  CHECK(monomial_basis(3, 4).size() == 35);  // matches brute-force enumeration
  CHECK(count_tuples(3, 4) == 35);

  for (int n = 1; n <= 4; ++n)
    for (int k = 0; k <= 8; ++k) {
      auto b = monomial_basis(n, k);
      CHECK(static_cast<long long>(b.size()) == binomial(n + k, k));
      CHECK(static_cast<int>(b.size()) == count_tuples(n, k));
      for (size_t i = 1; i < b.size(); ++i) {
        CHECK(b[i - 1] < b[i]);     // strict total order
        CHECK(!(b[i] < b[i - 1]));
      }
      CHECK(b[0] == MultiIndex::zero(n));
    }
}

TEST_CASE("arithmetic basics") {
  const Polynomial x = x_poly(1, 0);
  const Polynomial one = Polynomial::constant(1, 1.0);
  const Polynomial lhs = (x + one) * (x - one);
  const Polynomial expect = x * x - one;
  CHECK((lhs - expect).is_zero());

  std::mt19937 rng(1);
  Polynomial p = random_poly(rng, 2, 4, 6);
  CHECK(((p + Polynomial(2)) - p).is_zero());

  const Polynomial x1 = x_poly(2, 0), x2 = x_poly(2, 1);
  const Polynomial sq = (x1 + x2) * (x1 + x2);
  CHECK(sq.coeff(MultiIndex({2, 0})) == 1.0);
  CHECK(sq.coeff(MultiIndex({1, 1})) == 2.0);
  CHECK(sq.coeff(MultiIndex({0, 2})) == 1.0);
  CHECK(sq.term_count() == 3);

  CHECK_THROWS_AS(x1 + x, std::invalid_argument);
}

TEST_CASE("zero coefficients are dropped") {
  const Polynomial x = x_poly(1, 0);
  const Polynomial diff = x - x;
  CHECK(diff.is_zero());
  CHECK(diff.degree() == 0);
  Polynomial p(1);
  p.add_term(MultiIndex({3}), 0.0);
  CHECK(p.term_count() == 0);
}

TEST_CASE("differentiation") {
  const Polynomial x1 = x_poly(2, 0), x2 = x_poly(2, 1);
  const Polynomial p = x1 * x1 * x2;  // x1^2 x2
  CHECK((p.differentiate(0) - x1 * x2 * 2.0).is_zero());
  auto g = p.gradient();
  CHECK((g[0] - x1 * x2 * 2.0).is_zero());
  CHECK((g[1] - x1 * x1).is_zero());

  const Polynomial q = x_poly(1, 0) * x_poly(1, 0) * x_poly(1, 0) * x_poly(1, 0);
  const PolyMatrix h = hessian(q);
  CHECK((h.at(0, 0) - x_poly(1, 0) * x_poly(1, 0) * 12.0).is_zero());
}

TEST_CASE("differentiation commutes on random polynomials") {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const Polynomial p = random_poly(rng, 3, 5, 10);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Polynomial a = p.differentiate(i).differentiate(j);
        const Polynomial b = p.differentiate(j).differentiate(i);
        CHECK((a - b).is_zero());  // exact coefficient-wise equality
      }
  }
}

TEST_CASE("hessian entries are identical across the diagonal") {
  std::mt19937 rng(8);
  const Polynomial p = random_poly(rng, 3, 6, 12);
  const PolyMatrix h = hessian(p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK((h.at(i, j) - h.at(j, i)).is_zero());
}

TEST_CASE("translate") {
  const Polynomial x = x_poly(1, 0);
  const Polynomial p = x * x;
  const Polynomial q = p.translate({1.0});  // (x+1)^2
  CHECK(q.coeff(MultiIndex({0})) == doctest::Approx(1.0));
  CHECK(q.coeff(MultiIndex({1})) == doctest::Approx(2.0));
  CHECK(q.coeff(MultiIndex({2})) == doctest::Approx(1.0));

  std::mt19937 rng(3);
  const Polynomial r = random_poly(rng, 2, 5, 8);
  CHECK((r.translate({0.0, 0.0}) - r).is_zero());

  // exact inverse
  const Polynomial back = r.translate({0.5, -1.25}).translate({-0.5, 1.25});
  CHECK((back - r).max_abs_coeff() <= 1e-12 * std::max(1.0, r.max_abs_coeff()));
}

TEST_CASE("translate is a degree-preserving ring homomorphism") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Polynomial p = random_poly(rng, 2, 3, 5);
    const Polynomial q = random_poly(rng, 2, 3, 5);
    const Vec a = random_point(rng, 2, 1.5);
    const Polynomial lhs = (p * q).translate(a);
    const Polynomial rhs = p.translate(a) * q.translate(a);
    const double scale = std::max(1.0, lhs.max_abs_coeff());
    CHECK((lhs - rhs).max_abs_coeff() <= 1e-10 * scale);
    CHECK(p.translate(a).degree() == p.degree());
  }
}

TEST_CASE("translate matches shifted evaluation") {
  std::mt19937 rng(13);
  for (int rep = 0; rep < 25; ++rep) {
    const Polynomial p = random_poly(rng, 3, 5, 10);
    const Vec a = random_point(rng, 3, 2.0);
    const Vec x = random_point(rng, 3, 2.0);
    Vec xa(3);
    for (int i = 0; i < 3; ++i) xa[i] = x[i] + a[i];
    const double lhs = p.translate(a).eval(x);
    const double rhs = p.eval(xa);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("even norm powers") {
  const Polynomial p1 = even_norm_power(1, {0.0}, 4);
  CHECK((p1 - x_poly(1, 0) * x_poly(1, 0) * x_poly(1, 0) * x_poly(1, 0)).is_zero());

  const Polynomial p2 = even_norm_power(2, {0.0, 0.0}, 2);
  CHECK((p2 - (x_poly(2, 0) * x_poly(2, 0) + x_poly(2, 1) * x_poly(2, 1))).is_zero());

  // ((x1-1)^2 + x2^2)^2 expanded by hand via the library product
  const Polynomial d1 = x_poly(2, 0) - Polynomial::constant(2, 1.0);
  const Polynomial inner = d1 * d1 + x_poly(2, 1) * x_poly(2, 1);
  CHECK((even_norm_power(2, {1.0, 0.0}, 4) - inner * inner).max_abs_coeff() <= 1e-12);

  CHECK_THROWS_AS(even_norm_power(1, {0.0}, 3), std::invalid_argument);
  CHECK_THROWS_AS(even_norm_power(1, {0.0}, 0), std::invalid_argument);
}

TEST_CASE("evaluation") {
  const Polynomial x = x_poly(1, 0);
  const Polynomial p = x * x - Polynomial::constant(1, 1.0);
  CHECK(p.eval({2.0}) == doctest::Approx(3.0));
  CHECK(p.eval_grad({2.0})[0] == doctest::Approx(4.0));

  std::mt19937 rng(17);
  const Polynomial q = random_poly(rng, 2, 6, 12);
  const Vec pt = random_point(rng, 2, 1.0);
  const auto h = q.eval_hess(pt);
  CHECK(h(0, 1) == h(1, 0));  // exactly symmetric
}

TEST_CASE("json round trip preserves terms and order") {
  std::mt19937 rng(23);
  const Polynomial p = random_poly(rng, 2, 5, 9);
  const Polynomial q = Polynomial::from_json(p.to_json());
  CHECK((p - q).is_zero());
  CHECK(p.to_json() == q.to_json());

  CHECK_THROWS(Polynomial::from_json("{\"dim\": 2, \"terms\": [{\"exp\": [1], \"coef\": 1.0}]}"));
}
