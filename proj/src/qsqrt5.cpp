#include "smalelab/qsqrt5.hpp"

#include <cmath>
#include <sstream>

namespace smalelab {

int Q5::sign() const {
  int sa = a_.sign();
  int sb = b_.sign();
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // opposite signs: compare a^2 with 5 b^2
  Rational lhs = a_ * a_;
  Rational rhs = 5 * b_ * b_;
  if (lhs == rhs) return 0;  // impossible for rational a,b unless both zero
  return (lhs > rhs) ? sa : sb;
}

double Q5::approx() const {
  static const double s5 = std::sqrt(5.0);
  return static_cast<double>(a_) + static_cast<double>(b_) * s5;
}

std::string Q5::str() const {
  std::ostringstream os;
  os << a_ << (b_ >= 0 ? "+" : "") << b_ << "*sqrt5";
  return os.str();
}

Q5 q5_pow(const Q5& base, int exp) {
  if (exp < 0) return q5_pow(Q5(1) / base, -exp);
  Q5 acc = 1;
  Q5 b = base;
  int e = exp;
  while (e > 0) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

}  // namespace smalelab
