#include <cmath>

#include "smalelab/errors.hpp"
#include "smalelab/systems.hpp"

namespace smalelab::systems {

Horseshoe::Horseshoe(double lambda1, double cantor_ratio, int depth)
    : lambda1_(lambda1), lambda2_(2.0 / (1.0 + std::sqrt(5.0))), cantor_(cantor_ratio), depth_(depth) {
  if (!(lambda1 > 0 && lambda1 < 0.5)) throw config_error("horseshoe lambda1 must be in (0, 1/2)");
  if (!(cantor_ratio > 0 && cantor_ratio < 0.5)) throw config_error("horseshoe cantor ratio must be in (0, 1/2)");
  if (depth < 8 || depth > 48) throw config_error("horseshoe depth must be in 8..48");
  matrix_ = std::make_unique<symdyn::TransitionMatrix>(symdyn::TransitionMatrix::full_shift(2));
  parry_ = symdyn::parry(*matrix_);

  consts_.eps = 0.25;
  consts_.eps_prime = 0.125;
  consts_.eps_dprime = 1.0 / 64.0;
  consts_.lambda = 1.0 / lambda2_;  // the unstable plane contracts no faster than lambda2
  consts_.lip_fwd = std::max(1.0 / lambda1_, 1.0 / lambda2_);
  consts_.lip_inv = 1.0 / cantor_;
  consts_.ell = std::min(consts_.lip_fwd, consts_.lip_inv);
  consts_.Lambda = std::max(consts_.lip_fwd, consts_.lip_inv);
  consts_.diameter = std::sqrt(3.0);
  consts_.coding_diam = consts_.diameter;  // full-shift cylinders code themselves
}

std::array<double, 3> Horseshoe::embed(const HorseshoePoint& p) const {
  // F-coordinates from the forward half through the affine maps, E-coordinate
  // from the backward half through the Cantor addressing
  double fx = 0.5, fy = 0.5;
  for (int i = p.depth; i >= 1; --i) {
    if (p.at(i) == 1) {
      fx = lambda2_ * fx;
      fy = lambda1_ * fy;
    } else {
      fx = lambda2_ * fx + (1.0 - lambda2_);
      fy = lambda1_ * fy + (1.0 - lambda1_);
    }
  }
  double e = 0.5;
  for (int i = -p.depth; i <= 0; ++i) {
    if (p.at(i) == 1)
      e = cantor_ * e;
    else
      e = cantor_ * e + (1.0 - cantor_);
  }
  return {fx, fy, e};
}

Horseshoe::Cyl Horseshoe::cylinder_box(const std::vector<int>& symbols, int offset) const {
  Cyl c{0, 1, 0, 1, 0, 1};
  const int last = offset + static_cast<int>(symbols.size()) - 1;
  // F-box: compose A_{w_1} .. A_{w_j} applied to the unit square
  for (int i = last; i >= std::max(1, offset); --i) {
    int s = symbols[i - offset];
    if (s == 1) {
      c.fx_lo *= lambda2_;
      c.fx_hi *= lambda2_;
      c.fy_lo *= lambda1_;
      c.fy_hi *= lambda1_;
    } else {
      c.fx_lo = lambda2_ * c.fx_lo + (1.0 - lambda2_);
      c.fx_hi = lambda2_ * c.fx_hi + (1.0 - lambda2_);
      c.fy_lo = lambda1_ * c.fy_lo + (1.0 - lambda1_);
      c.fy_hi = lambda1_ * c.fy_hi + (1.0 - lambda1_);
    }
  }
  // E-interval: digits w_0, w_-1, ..., deepest applied first so the leading
  // digit w_0 acts last
  double l = 0, h = 1;
  for (int i = offset; i <= std::min(0, last); ++i) {
    int s = symbols[i - offset];
    if (s == 1) {
      l = cantor_ * l;
      h = cantor_ * h;
    } else {
      l = cantor_ * l + (1.0 - cantor_);
      h = cantor_ * h + (1.0 - cantor_);
    }
  }
  c.e_lo = l;
  c.e_hi = h;
  return c;
}

double Horseshoe::dist(const Point& a, const Point& b) const {
  auto pa = embed(std::get<HorseshoePoint>(a));
  auto pb = embed(std::get<HorseshoePoint>(b));
  double d = 0;
  for (int k = 0; k < 3; ++k) d += (pa[k] - pb[k]) * (pa[k] - pb[k]);
  return std::sqrt(d);
}

Point Horseshoe::apply(const Point& p) const {
  const auto& q = std::get<HorseshoePoint>(p);
  HorseshoePoint out;
  out.depth = q.depth - 1;
  if (out.depth < 0) throw truncation_too_shallow("window exhausted by shift");
  out.window.assign(q.window.begin() + 2, q.window.end());
  return out;
}

Point Horseshoe::apply_inv(const Point& p) const {
  const auto& q = std::get<HorseshoePoint>(p);
  HorseshoePoint out;
  out.depth = q.depth - 1;
  if (out.depth < 0) throw truncation_too_shallow("window exhausted by shift");
  out.window.assign(q.window.begin(), q.window.end() - 2);
  return out;
}

Point Horseshoe::bracket(const Point& a, const Point& b) const {
  if (dist(a, b) > consts_.eps + 1e-15) throw too_far("bracket undefined beyond eps");
  const auto& x = std::get<HorseshoePoint>(a);
  const auto& y = std::get<HorseshoePoint>(b);
  HorseshoePoint out;
  out.depth = std::min(x.depth, y.depth);
  out.window.resize(2 * out.depth + 1);
  for (int i = -out.depth; i <= out.depth; ++i) out.window[i + out.depth] = (i <= 0) ? y.at(i) : x.at(i);
  return out;
}

Point Horseshoe::random_point(Rng& rng) const {
  HorseshoePoint out;
  out.depth = depth_;
  out.window.resize(2 * depth_ + 1);
  for (auto& s : out.window) s = 1 + static_cast<int>(rng.next() & 1);
  return out;
}

}  // namespace smalelab::systems
