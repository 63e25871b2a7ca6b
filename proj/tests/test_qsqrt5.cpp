#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smalelab/qsqrt5.hpp"

using smalelab::Q5;
using smalelab::q5_pow;
using smalelab::Rational;

TEST_CASE("field arithmetic agrees with floating point") {
  Q5 phi = Q5::golden();
  CHECK(phi.approx() == doctest::Approx(1.6180339887498949).epsilon(1e-15));
  CHECK((phi * phi - phi - Q5(1)).sign() == 0);  // phi^2 = phi + 1
  CHECK((Q5::golden_sq() - phi * phi).sign() == 0);
  CHECK((Q5::inv_golden_sq() * Q5::golden_sq() - Q5(1)).sign() == 0);
}

TEST_CASE("exact sign for mixed-sign coefficients") {
  // 9 - 4 sqrt5 < 0 since 16*5 = 80 > 81 is false: 81 > 80, so positive
  Q5 a{9, -4};
  CHECK(a.sign() > 0);
  Q5 b{-9, 4};
  CHECK(b.sign() < 0);
  Q5 c{Rational(-2), Rational(1)};  // sqrt5 - 2 > 0
  CHECK(c.sign() > 0);
  CHECK(Q5(0).sign() == 0);
}

TEST_CASE("powers and division") {
  Q5 p = q5_pow(Q5::golden(), 10);
  // phi^10 = 55 phi + 34 by the recurrence
  Q5 expect = Q5(55) * Q5::golden() + Q5(34);
  CHECK((p - expect).sign() == 0);
  Q5 inv = q5_pow(Q5::golden(), -10);
  CHECK((p * inv - Q5(1)).sign() == 0);
}

TEST_CASE("interval predicates are exact on touching endpoints") {
  Q5 c{0, Rational(1, 5)};  // 1/sqrt5
  smalelab::Q5Interval a{Q5(0), c};
  smalelab::Q5Interval b{c, c + c};
  CHECK(a.overlaps_closed(b));
  CHECK(!a.overlaps_open(b));
  CHECK(a.intersect(b).lo == c);
  CHECK(a.contains(c));
}
