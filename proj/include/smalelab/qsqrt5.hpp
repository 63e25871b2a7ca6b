#ifndef SMALELAB_QSQRT5_HPP
#define SMALELAB_QSQRT5_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace smalelab {

using Rational = boost::multiprecision::cpp_rational;

// Exact arithmetic in the field Q(sqrt5). All cat-map geometry lives here so
// polygon predicates are exact; doubles appear only in final distance reports.
class Q5 {
public:
  Q5() = default;
  Q5(long v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  Q5(Rational a, Rational b) : a_(std::move(a)), b_(std::move(b)) {}
  static Q5 sqrt5() { return {0, 1}; }
  static Q5 golden() { return {Rational(1, 2), Rational(1, 2)}; }          // phi
  static Q5 golden_sq() { return {Rational(3, 2), Rational(1, 2)}; }       // phi^2
  static Q5 inv_golden_sq() { return {Rational(3, 2), Rational(-1, 2)}; }  // phi^-2

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }

  Q5 operator+(const Q5& o) const { return {a_ + o.a_, b_ + o.b_}; }
  Q5 operator-(const Q5& o) const { return {a_ - o.a_, b_ - o.b_}; }
  Q5 operator-() const { return {-a_, -b_}; }
  Q5 operator*(const Q5& o) const {
    return {a_ * o.a_ + 5 * b_ * o.b_, a_ * o.b_ + b_ * o.a_};
  }
  Q5 operator/(const Q5& o) const {
    Rational n = o.a_ * o.a_ - 5 * o.b_ * o.b_;  // field norm, nonzero for o != 0
    Q5 conj{o.a_, -o.b_};
    Q5 num = *this * conj;
    return {num.a_ / n, num.b_ / n};
  }
  Q5& operator+=(const Q5& o) { return *this = *this + o; }
  Q5& operator-=(const Q5& o) { return *this = *this - o; }
  Q5& operator*=(const Q5& o) { return *this = *this * o; }

  // exact sign of a + b*sqrt5
  int sign() const;

  bool operator==(const Q5& o) const { return a_ == o.a_ && b_ == o.b_; }
  bool operator!=(const Q5& o) const { return !(*this == o); }
  bool operator<(const Q5& o) const { return (*this - o).sign() < 0; }
  bool operator<=(const Q5& o) const { return (*this - o).sign() <= 0; }
  bool operator>(const Q5& o) const { return (*this - o).sign() > 0; }
  bool operator>=(const Q5& o) const { return (*this - o).sign() >= 0; }

  double approx() const;
  std::string str() const;

private:
  Rational a_ = 0, b_ = 0;
};

Q5 q5_pow(const Q5& base, int exp);  // exp may be negative for units

// Exact closed interval [lo, hi] in one eigen-coordinate.
struct Q5Interval {
  Q5 lo, hi;
  bool valid() const { return lo <= hi; }
  bool overlaps_closed(const Q5Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  bool overlaps_open(const Q5Interval& o) const { return lo < o.hi && o.lo < hi; }
  bool contains(const Q5& x) const { return lo <= x && x <= hi; }
  Q5Interval intersect(const Q5Interval& o) const {
    return {lo >= o.lo ? lo : o.lo, hi <= o.hi ? hi : o.hi};
  }
  Q5 width() const { return hi - lo; }
};

}  // namespace smalelab

#endif
