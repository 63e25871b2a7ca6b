#include "smalelab/systems.hpp"

#include <algorithm>
#include <cmath>

namespace smalelab::systems {

Sft::Sft(std::string name, symdyn::TransitionMatrix m, int depth)
    : name_(std::move(name)), m_(std::move(m)), parry_(symdyn::parry(m_)), depth_(depth) {
  consts_.eps = 0.5;
  consts_.eps_prime = 0.25;
  consts_.eps_dprime = 1.0 / 64.0;
  consts_.lambda = 2.0;
  consts_.lip_fwd = consts_.lip_inv = 2.0;
  consts_.ell = consts_.Lambda = 2.0;
  consts_.diameter = 1.0;
  consts_.coding_diam = 1.0;  // cylinders code themselves
}

namespace {

const SftPoint& sft(const Point& p) { return std::get<SftPoint>(p); }
const TorusPoint& torus(const Point& p) { return std::get<TorusPoint>(p); }
const SolenoidPoint& sol(const Point& p) { return std::get<SolenoidPoint>(p); }
const HorseshoePoint& horse(const Point& p) { return std::get<HorseshoePoint>(p); }

}  // namespace

symdyn::DyadicDistance Sft::dyadic_dist(const Point& a, const Point& b) const {
  symdyn::ShiftPoint x{sft(a).window, sft(a).depth};
  symdyn::ShiftPoint y{sft(b).window, sft(b).depth};
  return symdyn::word_metric(x, y);
}

double Sft::dist(const Point& a, const Point& b) const { return dyadic_dist(a, b).value(); }

Point Sft::apply(const Point& p) const {
  const auto& q = sft(p);
  SftPoint out;
  out.depth = q.depth - 1;
  if (out.depth < 0) throw truncation_too_shallow("window exhausted by shift");
  out.window.assign(q.window.begin() + 2, q.window.end());
  return out;
}

Point Sft::apply_inv(const Point& p) const {
  const auto& q = sft(p);
  SftPoint out;
  out.depth = q.depth - 1;
  if (out.depth < 0) throw truncation_too_shallow("window exhausted by shift");
  out.window.assign(q.window.begin(), q.window.end() - 2);
  return out;
}

Point Sft::bracket(const Point& a, const Point& b) const {
  const auto& x = sft(a);
  const auto& y = sft(b);
  if (dist(a, b) > consts_.eps + 1e-15) throw too_far("bracket undefined beyond eps");
  SftPoint out;
  out.depth = std::min(x.depth, y.depth);
  out.window.resize(2 * out.depth + 1);
  for (int i = -out.depth; i <= out.depth; ++i) out.window[i + out.depth] = (i <= 0) ? y.at(i) : x.at(i);
  return out;
}

Point Sft::random_point(Rng& rng) const {
  auto p = symdyn::ShiftPoint::random(m_, parry_, depth_, rng);
  return SftPoint{p.window, p.depth};
}

std::unique_ptr<SmaleSystem> make_system(const std::string& name, const SystemParams& params) {
  if (name == "full2") return std::make_unique<Sft>("full2", symdyn::TransitionMatrix::full_shift(2), params.sft_depth);
  if (name == "full3") return std::make_unique<Sft>("full3", symdyn::TransitionMatrix::full_shift(3), params.sft_depth);
  if (name == "golden") return std::make_unique<Sft>("golden", symdyn::TransitionMatrix::golden_mean(), params.sft_depth);
  if (name == "catmap") return std::make_unique<CatMap>(params.catmap_prerefine);
  if (name == "solenoid") return std::make_unique<Solenoid>(params.solenoid_depth, params.solenoid_base);
  if (name == "horseshoe")
    return std::make_unique<Horseshoe>(params.horseshoe_lambda1, params.horseshoe_cantor, params.horseshoe_depth);
  throw config_error("unknown system '" + name + "'");
}

LipschitzEstimate lipschitz_estimate(const SmaleSystem& sys, int n_pairs, uint64_t seed) {
  if (n_pairs < 1) throw config_error("n_pairs must be >= 1");
  Rng rng(seed, 17);
  LipschitzEstimate out;
  const double eps = sys.constants().eps;
  int accepted = 0;
  int attempts = 0;
  while (accepted < n_pairs && attempts < 200 * n_pairs) {
    ++attempts;
    Point x = sys.random_point(rng);
    Point y = sys.random_point(rng);
    double d = sys.dist(x, y);
    if (d <= 0 || d > eps) continue;
    ++accepted;
    double df = sys.dist(sys.apply(x), sys.apply(y));
    double di = sys.dist(sys.apply_inv(x), sys.apply_inv(y));
    out.lip_fwd = std::max(out.lip_fwd, df / d);
    out.lip_inv = std::max(out.lip_inv, di / d);
    // [x,y] shares the stable coordinate of y, so {y,[x,y]} is a local
    // unstable pair and contracts under the inverse; {y,[y,x]} is the stable
    // mirror and contracts forward
    Point s = sys.bracket(x, y);
    double ds = sys.dist(y, s);
    if (ds > 1e-12 && ds <= eps) {
      double c = sys.dist(sys.apply_inv(y), sys.apply_inv(s));
      if (c > 0) out.lambda_emp = std::max(out.lambda_emp, ds / c);
    }
    Point u = sys.bracket(y, x);
    double du = sys.dist(y, u);
    if (du > 1e-12 && du <= eps) {
      double c = sys.dist(sys.apply(y), sys.apply(u));
      if (c > 0) out.lambda_emp = std::max(out.lambda_emp, du / c);
    }
  }
  return out;
}

std::vector<Point> sample_points(const SmaleSystem& sys, int n, uint64_t seed) {
  std::vector<Point> out;
  out.reserve(n);
  Rng rng(seed, 5);
  for (int i = 0; i < n; ++i) out.push_back(sys.random_point(rng));
  return out;
}

std::array<double, 3> horseshoe_point(const Horseshoe& sys, const HorseshoePoint& code) {
  return sys.embed(code);
}

}  // namespace smalelab::systems
