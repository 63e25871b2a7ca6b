#include <cmath>

#include "smalelab/errors.hpp"
#include "smalelab/systems.hpp"

namespace smalelab::systems {

namespace {

double circle_dist(double a, double b) {
  double t = std::abs(a - b);
  t -= std::floor(t);
  return std::min(t, 1.0 - t);
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

double SolenoidPoint::angle(int n) const {
  double a = theta;
  for (int k = 0; k < n; ++k) a = (a + bits[k]) / 2.0;
  return a;
}

Solenoid::Solenoid(int depth, int base_halfwidth) : depth_(depth), base_m_(base_halfwidth) {
  if (depth < 4 || depth > 48) throw config_error("solenoid depth must be in 4..48");
  if (base_halfwidth < 1 || base_halfwidth > 4) throw config_error("solenoid base halfwidth must be in 1..4");
  // base partition symbols are the (2m-1)-bit blocks of the two-set cover;
  // every block is admissible (the cover codes the full 2-shift)
  const int nsym = 1 << (2 * base_m_ - 1);
  std::vector<uint8_t> ent(static_cast<size_t>(nsym) * nsym, 0);
  const int mask = (1 << (2 * base_m_ - 2)) - 1;  // low 2m-2 bits
  for (int a = 0; a < nsym; ++a)
    for (int b = 0; b < nsym; ++b)
      if ((a & mask) == (b >> 1)) ent[a * nsym + b] = 1;  // one-bit left shift overlap
  matrix_ = std::make_unique<symdyn::TransitionMatrix>(nsym, std::move(ent));
  parry_ = symdyn::parry(*matrix_);

  tflow_norm_ = 0;
  for (int n = 0; n <= depth_; ++n) tflow_norm_ += std::ldexp(1.0, -2 * n);

  consts_.eps = 0.25;
  consts_.eps_prime = 0.125;
  consts_.eps_dprime = 1.0 / 128.0;
  consts_.lambda = 2.0;
  consts_.lip_fwd = 2.5;
  consts_.lip_inv = 2.0;
  consts_.ell = 2.0;
  consts_.Lambda = 2.5;
  consts_.diameter = 1.0;  // sum 2^-n * (1/2)
  consts_.coding_diam = 1.0;  // blocks of the two-set cover are certified 2-to-1
}

std::vector<int> Solenoid::symbol_bits(int symbol) const {
  const int w = 2 * base_m_ - 1;
  std::vector<int> bits(w);
  int v = symbol - 1;
  for (int k = 0; k < w; ++k) bits[w - 1 - k] = (v >> k) & 1;  // b_{1-m}..b_{m-1}
  return bits;
}

double Solenoid::dist(const Point& a, const Point& b) const {
  const auto& x = std::get<SolenoidPoint>(a);
  const auto& y = std::get<SolenoidPoint>(b);
  double ax = x.theta, ay = y.theta;
  double d = circle_dist(ax, ay);
  double scale = 1.0;
  for (int n = 1; n <= depth_; ++n) {
    ax = (ax + x.bits[n - 1]) / 2.0;
    ay = (ay + y.bits[n - 1]) / 2.0;
    scale *= 0.5;
    d += scale * circle_dist(ax, ay);
  }
  return d;
}

Point Solenoid::apply(const Point& p) const {
  const auto& x = std::get<SolenoidPoint>(p);
  SolenoidPoint out;
  out.theta = frac(2.0 * x.theta);
  out.bits.resize(depth_);
  out.bits[0] = x.theta >= 0.5 ? 1 : 0;
  for (int n = 1; n < depth_; ++n) out.bits[n] = x.bits[n - 1];
  return out;
}

Point Solenoid::apply_inv(const Point& p) const {
  const auto& x = std::get<SolenoidPoint>(p);
  SolenoidPoint out;
  out.theta = (x.theta + x.bits[0]) / 2.0;
  out.bits.resize(depth_);
  for (int n = 0; n + 1 < depth_; ++n) out.bits[n] = x.bits[n + 1];
  out.bits[depth_ - 1] = 0;  // truncated tail; error within 2^-K
  return out;
}

Point Solenoid::bracket(const Point& a, const Point& b) const {
  if (dist(a, b) > consts_.eps + 1e-15) throw too_far("bracket undefined beyond eps");
  const auto& x = std::get<SolenoidPoint>(a);
  const auto& y = std::get<SolenoidPoint>(b);
  // unique |t| <= 1/4 with x_0 = y_0 e^{2 pi i t}; the bracket rotates the
  // whole y-thread by t with halved phases downstream
  double t = x.theta - y.theta;
  t -= std::round(t);
  SolenoidPoint out;
  out.theta = x.theta;
  out.bits.resize(depth_);
  double prev_y = y.theta, prev_z = frac(y.theta + t);
  double scale = 0.5;
  for (int n = 1; n <= depth_; ++n) {
    double yn = (prev_y + y.bits[n - 1]) / 2.0;
    double zn = frac(yn + t * scale);
    // recover the branch bit: z_{n} = (z_{n-1} + c)/2 mod 1 with c in {0,1}
    double c = 2.0 * zn - prev_z;
    long ci = std::lround(c);
    out.bits[n - 1] = static_cast<uint8_t>(((ci % 2) + 2) % 2);
    prev_y = yn;
    prev_z = zn;
    scale *= 0.5;
  }
  return out;
}

Point Solenoid::random_point(Rng& rng) const {
  // Parry sample through the full 2-shift coding: negative window bits give
  // the dyadic digits of the angle, nonnegative bits the root choices
  SolenoidPoint out;
  out.bits.resize(depth_);
  double theta = 0;
  for (int k = 1; k <= depth_ + 16; ++k) theta += std::ldexp(static_cast<double>(rng.next() & 1), -k);
  out.theta = theta;
  for (int n = 0; n < depth_; ++n) out.bits[n] = static_cast<uint8_t>(rng.next() & 1);
  return out;
}

}  // namespace smalelab::systems
