#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "sosnewton/uni3.hpp"
#include "sosnewton/xcli.hpp"

using namespace sosnewton::uni3;
using sosnewton::jets::FunctionOracle;
using sosnewton::jets::make_atan1;
using sosnewton::jets::make_sqrt1;

namespace {

ScalarDerivs sqrt1_derivs(double x) {
  ScalarDerivs d;
  d.f1 = x / std::sqrt(x * x + 1.0);
  d.f2 = std::pow(x * x + 1.0, -1.5);
  d.f3 = -3.0 * x * std::pow(x * x + 1.0, -2.5);
  return d;
}

ScalarDerivs atan1_derivs(double x) {
  ScalarDerivs d;
  d.f1 = 2.0 * std::atan(x) + x / 5.0;
  d.f2 = 2.0 / (1.0 + x * x) + 0.2;
  d.f3 = -4.0 * x / ((1.0 + x * x) * (1.0 + x * x));
  return d;
}

}  // namespace

TEST_CASE("third-order map on the square-root example at 1.5") {
  const ScalarDerivs d = sqrt1_derivs(1.5);
  // arithmetic oracle: evaluate the closed form piece by piece
  const double lead = 1.5 - 2.0 * d.f2 / d.f3;
  const double radicand = (d.f1 - (2.0 / 3.0) * d.f2 * d.f2 / d.f3) / (d.f3 * d.f3 / (12.0 * d.f2));
  const double expect = lead - std::cbrt(radicand);
  CHECK(n3_map(d, 1.5) == doctest::Approx(expect));
  CHECK(n3_map(d, 1.5) == doctest::Approx(-0.2801).epsilon(2e-3));
}

TEST_CASE("third-order map falls back to the classical step when f''' vanishes") {
  ScalarDerivs d;
  d.f1 = 0.7;
  d.f2 = 2.0;
  d.f3 = 0.0;
  CHECK(n3_map(d, 1.0) == doctest::Approx(1.0 - 0.7 / 2.0));
  d.f3 = 5e-13;  // below the degeneracy threshold
  CHECK(n3_map(d, 1.0) == doctest::Approx(1.0 - 0.7 / 2.0));
}

TEST_CASE("third-order map with vanishing radicand") {
  ScalarDerivs d;
  d.f2 = 1.3;
  d.f3 = -0.7;
  d.f1 = (2.0 / 3.0) * d.f2 * d.f2 / d.f3;
  CHECK(n3_map(d, 0.4) == doctest::Approx(0.4 - 2.0 * d.f2 / d.f3));
}

TEST_CASE("third-order map rejects nonpositive curvature") {
  ScalarDerivs d;
  d.f1 = 1.0;
  d.f2 = -1.0;
  d.f3 = 1.0;
  CHECK_THROWS_AS(n3_map(d, 0.0), std::domain_error);
  d.f2 = 0.0;
  CHECK_THROWS_AS(n3_map(d, 0.0), std::domain_error);
  CHECK_THROWS_AS(n2_map(d, 0.0), std::domain_error);
}

TEST_CASE("stationary points are fixed points of the third-order map") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> upos(0.05, 3.0);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    ScalarDerivs d;
    d.f1 = 0.0;
    d.f2 = upos(rng);
    double f3 = u(rng);
    if (std::fabs(f3) < 1e-3) f3 = 1e-3;
    d.f3 = f3;
    const double x = u(rng);
    CHECK(std::fabs(n3_map(d, x) - x) <= 1e-9);
  }
}

TEST_CASE("classical map on the square-root example is -x^3") {
  for (double x : {0.3, 0.9, 1.0, 1.5, 2.4}) {
    CHECK(n2_map(sqrt1_derivs(x), x) == doctest::Approx(-x * x * x).epsilon(1e-12));
  }
  CHECK(n2_map(sqrt1_derivs(1.0), 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("classical map on the arctangent example oscillates at 13.494") {
  const double x = 13.494;
  CHECK(std::fabs(n2_map(atan1_derivs(x), x) + x) <= 0.01);
}

TEST_CASE("basin radii by bisection") {
  const FunctionOracle sq = make_sqrt1();
  const auto classical = sosnewton::xcli::classical_map(sq);
  const double r2 = basin_radius(classical, 0.0, 0.5, 2.0);
  CHECK(r2 == doctest::Approx(1.0).epsilon(1e-6));

  const auto third = sosnewton::xcli::closed_form_third_order_map(sq);
  const double r3 = basin_radius(third, 0.0, 2.0, 4.0);
  CHECK(std::fabs(r3 - 3.407) <= 1e-3);

  // closed-form radius from the complex cube root expression
  const std::complex<double> c = std::pow(std::complex<double>(1691.0, 9.0 * std::sqrt(47.0)), 1.0 / 3.0);
  const std::complex<double> val = (11.0 + 142.0 / c + c) / 3.0;
  CHECK(std::fabs(val.imag()) <= 1e-9);
  const double beta = std::sqrt(val.real());
  CHECK(std::fabs(beta - r3) <= 1e-3);

  const FunctionOracle at = make_atan1();
  const auto classical_at = sosnewton::xcli::classical_map(at);
  const double ra = basin_radius(classical_at, 0.0, 1.0, 3.0);
  CHECK(std::fabs(ra - 1.712) <= 5e-3);
}

TEST_CASE("basin radius requires a bracket") {
  const FunctionOracle at = make_atan1();
  // the third-order closed-form map converges globally; no bracket exists
  const auto third = sosnewton::xcli::closed_form_third_order_map(at);
  CHECK(converges_from(third, 8.0, 0.0, 200, 1e-9));
  CHECK_THROWS_AS(basin_radius(third, 0.0, 1.0, 8.0, 200, 1e-9, 10), std::invalid_argument);
}

TEST_CASE("non-finite and exploding iterations count as non-convergent") {
  const auto blow_up = [](double x) { return x * x + 1.0; };
  CHECK(!converges_from(blow_up, 2.0, 0.0, 100, 1e-9));
  const auto nan_map = [](double) { return std::nan(""); };
  CHECK(!converges_from(nan_map, 2.0, 0.0, 100, 1e-9));
  const auto throwing = [](double) -> double { throw std::runtime_error("boom"); };
  CHECK(!converges_from(throwing, 2.0, 0.0, 100, 1e-9));
}
