#include "smalelab/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace smalelab::metrics {

using systems::Kind;
using systems::Point;
using systems::SmaleSystem;

AxBound a_x_bound(double lambda, double Lambda) {
  if (!(lambda > 1)) throw config_error("lambda must exceed 1");
  if (!(Lambda < std::numeric_limits<double>::infinity())) throw config_error("Lambda must be finite");
  AxBound out;
  out.upper = Lambda * lambda / (lambda * lambda - 1);
  out.lower = lambda / (2 * Lambda);
  return out;
}

std::vector<std::pair<Point, Point>> scaled_pairs(const SmaleSystem& sys, int n_pairs, uint64_t seed) {
  // pair construction must probe all scales, not just typical distances:
  // perturb sampled points at dyadic depths via the coding or coordinates
  Rng rng(seed, 71);
  std::vector<std::pair<Point, Point>> out;
  out.reserve(n_pairs);
  int guard = 0;
  while (static_cast<int>(out.size()) < n_pairs && guard++ < 100 * n_pairs) {
    Point x = sys.random_point(rng);
    int mode = static_cast<int>(rng.below(3));
    if (mode == 0) {
      Point y = sys.random_point(rng);
      if (sys.dist(x, y) > 0) out.emplace_back(x, y);
      continue;
    }
    switch (sys.kind()) {
      case Kind::Sft: {
        auto y = std::get<systems::SftPoint>(x);
        int j = 1 + static_cast<int>(rng.below(static_cast<uint32_t>(y.depth)));
        if (rng.below(2)) j = -j;
        const auto& m = sys.base_matrix();
        int prev = (std::abs(j) > 0 && j - 1 >= -y.depth) ? y.at(j - 1) : 0;
        int next = (j + 1 <= y.depth) ? y.at(j + 1) : 0;
        for (int s = 1; s <= m.size(); ++s) {
          if (s == y.at(j)) continue;
          bool ok = (j - 1 < -y.depth || m.allows(prev, s)) && (j + 1 > y.depth || m.allows(s, next));
          if (ok) {
            y.window[j + y.depth] = s;
            break;
          }
        }
        Point py = y;
        if (sys.dist(x, py) > 0) out.emplace_back(x, py);
        break;
      }
      case Kind::Horseshoe: {
        auto y = std::get<systems::HorseshoePoint>(x);
        int j = 1 + static_cast<int>(rng.below(static_cast<uint32_t>(y.depth)));
        if (rng.below(2)) j = -j;
        y.window[j + y.depth] = 3 - y.window[j + y.depth];
        Point py = y;
        out.emplace_back(x, py);
        break;
      }
      case Kind::CatMap: {
        auto y = std::get<systems::TorusPoint>(x);
        double scale = std::ldexp(1.0, -static_cast<int>(rng.below(40)));
        double ang = rng.uniform(0, 6.283185307179586);
        y.x += scale * std::cos(ang);
        y.y += scale * std::sin(ang);
        y.x -= std::floor(y.x);
        y.y -= std::floor(y.y);
        Point py = y;
        if (sys.dist(x, py) > 0) out.emplace_back(x, py);
        break;
      }
      case Kind::Solenoid: {
        auto y = std::get<systems::SolenoidPoint>(x);
        if (rng.below(2)) {
          double scale = std::ldexp(1.0, -(2 + static_cast<int>(rng.below(30))));
          y.theta += scale;
          y.theta -= std::floor(y.theta);
        } else {
          int j = static_cast<int>(rng.below(static_cast<uint32_t>(y.bits.size())));
          y.bits[j] ^= 1;
        }
        Point py = y;
        if (sys.dist(x, py) > 0) out.emplace_back(x, py);
        break;
      }
    }
  }
  return out;
}

FathiReport fathi_check(const SmaleSystem& sys, int n_pairs, uint64_t seed) {
  const auto& c = sys.constants();
  FathiReport rep;
  auto ax = a_x_bound(c.lambda, c.Lambda);
  rep.theoretical_applicable = c.lambda > 2 * ax.upper;
  if (rep.theoretical_applicable) {
    rep.k_theoretical = c.lambda / (2 * ax.upper);
    // xi = Lambda^{-1} eps~, with eps~ the largest dyadic scale kept inside
    // eps' by one application of the map either way
    double eps_t = c.eps_prime;
    while (eps_t * c.Lambda > c.eps_prime && eps_t > 1e-12) eps_t /= 2;
    rep.xi_theoretical = eps_t / c.Lambda;
  }

  auto pairs = scaled_pairs(sys, n_pairs, seed);
  if (pairs.empty()) throw config_error("no admissible pairs sampled");

  struct Probe {
    double d, m;
  };
  std::vector<Probe> probes;
  probes.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    double d = sys.dist(x, y);
    double m = std::max(sys.dist(sys.apply(x), sys.apply(y)),
                        sys.dist(sys.apply_inv(x), sys.apply_inv(y)));
    probes.push_back({d, m});
  }

  // largest k on the geometric grid passing all pairs with a jointly tuned xi
  const double xi_floor = c.eps * std::ldexp(1.0, -10);
  auto passes = [&](double k, double& xi_out) {
    double xi_max = std::numeric_limits<double>::infinity();
    for (const auto& p : probes)
      if (p.m < k * p.d * (1 - 1e-12)) xi_max = std::min(xi_max, p.m);
    if (xi_max < xi_floor) return false;
    // snap to the dyadic-fraction grid of eps
    double xi = c.eps;
    while (xi > xi_max && xi > xi_floor) xi /= 2;
    if (xi > xi_max) return false;
    xi_out = xi;
    return true;
  };

  std::vector<double> grid;
  for (double k = 1.01; k < c.Lambda; k *= 1.01) grid.push_back(k);
  grid.push_back(c.Lambda);
  if (rep.theoretical_applicable) grid.push_back(rep.k_theoretical);
  std::sort(grid.begin(), grid.end());

  rep.pass = false;
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    double xi = 0;
    if (passes(*it, xi)) {
      rep.k_empirical = *it;
      rep.xi_empirical = xi;
      rep.pass = true;
      break;
    }
  }
  if (!rep.pass) {
    double xi = 0;
    if (!passes(1.0 + 1e-6, xi)) throw no_valid_k("no k > 1 satisfies the expansivity bound");
  }
  return rep;
}

MetricTransform::MetricTransform(const SmaleSystem& sys, double k, int truncation_guard)
    : sys_(&sys), k_(k), guard_(truncation_guard) {
  if (!(k > 1)) throw config_error("transform needs k > 1");
}

double MetricTransform::distance(const Point& x, const Point& y) const {
  const double diam = sys_->constants().diameter;
  double best = sys_->dist(x, y);
  // forward orbit
  for (int dir = 0; dir < 2; ++dir) {
    Point a = x, b = y;
    double scale = 1;
    int beyond = 0;
    for (int n = 1; n < 200; ++n) {
      try {
        a = dir == 0 ? sys_->apply(a) : sys_->apply_inv(a);
        b = dir == 0 ? sys_->apply(b) : sys_->apply_inv(b);
      } catch (const PreconditionError&) {
        break;  // truncated codings run out of window
      }
      scale /= k_;
      best = std::max(best, sys_->dist(a, b) * scale);
      // sound stopping rule: every further term is at most diam/k^n
      if (diam * scale < best) {
        if (++beyond > guard_) break;
      } else {
        beyond = 0;
      }
    }
  }
  return best;
}

double artigue_distance(const MetricTransform& t, const Point& x, const Point& y) {
  return t.distance(x, y);
}

SelfSimReport selfsimilarity_audit(const MetricTransform& t, int n_pairs, uint64_t seed) {
  const auto& sys = t.system();
  SelfSimReport rep;
  rep.gamma_target = std::log(t.k()) / std::log(sys.constants().Lambda);
  auto pairs = scaled_pairs(sys, n_pairs, seed);

  double lip = 0;
  double contr = 0;
  std::vector<double> lx, ly;
  bool ok = true;
  for (const auto& [x, y] : pairs) {
    double da = t.distance(x, y);
    if (!(da > 0)) continue;
    double d = sys.dist(x, y);
    double fwd = t.distance(sys.apply(x), sys.apply(y));
    double inv = t.distance(sys.apply_inv(x), sys.apply_inv(y));
    double ratio = std::max(fwd, inv) / da;
    lip = std::max(lip, ratio);
    if (ratio > t.k() * (1 + 1e-9) && ok) {
      ok = false;
      rep.counterexample = "lipschitz ratio " + std::to_string(ratio);
    }
    if (d > 0 && d < 0.5) {
      lx.push_back(std::log2(d));
      ly.push_back(std::log2(da));
    }
    // local stable pair through the bracket: forward contraction at rate k
    if (d <= sys.constants().eps && d > 1e-12) {
      try {
        Point s = sys.bracket(y, x);  // shares the unstable data of y
        double ds = t.distance(y, s);
        if (ds > 1e-10) {
          double c = t.distance(sys.apply(y), sys.apply(s));
          contr = std::max(contr, c / ds);
          if (c / ds > (1.0 / t.k()) * (1 + 1e-6) && ok) {
            ok = false;
            rep.counterexample = "stable contraction ratio " + std::to_string(c / ds);
          }
        }
      } catch (const PreconditionError&) {
      }
    }
  }
  rep.lip_max = lip;
  rep.stable_contraction = contr;

  // Hoelder fit d <= d_A <= c d^gamma on the sampled pairs
  if (lx.size() >= 8) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    double n = static_cast<double>(lx.size());
    rep.holder_gamma = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double worst = 0;
    for (size_t i = 0; i < lx.size(); ++i)
      worst = std::max(worst, ly[i] - rep.holder_gamma * lx[i]);
    rep.holder_c = std::exp2(worst);
  }
  rep.pass = ok;
  if (!ok) throw AuditError("SelfSimilarity", rep.counterexample);
  return rep;
}

}  // namespace smalelab::metrics
