#include "smalelab/dims.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "smalelab/parallel.hpp"

namespace smalelab::dims {

using partitions::RefinedCover;
using systems::Kind;
using systems::Point;
using systems::SmaleSystem;

RectangleCheck bowen_rectangle_check(const SmaleSystem& sys, const std::vector<RefinedCover>& covers) {
  const auto& c = sys.constants();
  if (std::abs(c.ell - c.lambda) > 0.05 * c.lambda)
    throw not_semi_conformal("minimal Lipschitz constant is not within 5% of the contraction");
  RectangleCheck out;
  out.s0 = 2 * std::log(sys.base_parry().lambda) / std::log(c.lambda);
  double K = 1;
  for (const auto& cov : covers) {
    for (size_t k = 0; k < cov.count(); ++k) {
      double mu = cov.geom->rect_measure(static_cast<int>(k));
      double d = cov.geom->diam(static_cast<int>(k));
      double ratio = mu / std::pow(d, out.s0);
      K = std::max(K, std::max(ratio, 1.0 / ratio));
    }
  }
  out.K = K;
  return out;
}

namespace {

BallMeasure horseshoe_quadrature(const systems::Horseshoe& sys, const Point& x, double r) {
  // certified branch-and-bound over the product coding tree: a cylinder box is
  // inside the ball, outside it, or gets subdivided
  auto center = sys.embed(std::get<systems::HorseshoePoint>(x));
  double lo = 0, hi = 0;
  struct Node {
    std::vector<int> word;  // symbols indexed from offset
    int offset;
    double mass;
  };
  std::vector<Node> stack{{std::vector<int>{1}, 0, 0.5}, {std::vector<int>{2}, 0, 0.5}};
  const int max_rank = 44;
  while (!stack.empty()) {
    Node nd = std::move(stack.back());
    stack.pop_back();
    auto box = sys.cylinder_box(nd.word, nd.offset);
    double dx0 = std::max({box.fx_lo - center[0], center[0] - box.fx_hi, 0.0});
    double dy0 = std::max({box.fy_lo - center[1], center[1] - box.fy_hi, 0.0});
    double dz0 = std::max({box.e_lo - center[2], center[2] - box.e_hi, 0.0});
    double dmin = std::sqrt(dx0 * dx0 + dy0 * dy0 + dz0 * dz0);
    if (dmin > r) continue;  // outside
    double mx = std::max(std::abs(box.fx_lo - center[0]), std::abs(box.fx_hi - center[0]));
    double my = std::max(std::abs(box.fy_lo - center[1]), std::abs(box.fy_hi - center[1]));
    double mz = std::max(std::abs(box.e_lo - center[2]), std::abs(box.e_hi - center[2]));
    double dmax = std::sqrt(mx * mx + my * my + mz * mz);
    if (dmax <= r) {
      lo += nd.mass;
      hi += nd.mass;
      continue;
    }
    if (static_cast<int>(nd.word.size()) >= max_rank) {
      hi += nd.mass;  // undecided at the depth cap
      continue;
    }
    // split on the side that currently limits the resolution: grow the word
    // forward and backward alternately
    bool grow_right = (nd.word.size() + nd.offset) <= static_cast<size_t>(-nd.offset) + 1;
    for (int s = 1; s <= 2; ++s) {
      Node child = nd;
      child.mass = nd.mass / 2;
      if (grow_right) {
        child.word.push_back(s);
      } else {
        child.word.insert(child.word.begin(), s);
        child.offset -= 1;
      }
      stack.push_back(std::move(child));
    }
  }
  BallMeasure out;
  out.ci_lo = lo;
  out.ci_hi = hi;
  out.estimate = 0.5 * (lo + hi);
  out.exact = false;
  return out;
}

}  // namespace

BallMeasure ball_measure(const SmaleSystem& sys, const std::vector<RefinedCover>& covers,
                         const Point& x, double r, int n_samples, uint64_t seed) {
  if (!(r > 0) || r >= sys.constants().diameter) throw config_error("radius outside (0, diam X)");
  BallMeasure out;
  switch (sys.kind()) {
    case Kind::Sft: {
      // closed r-ball equals the symmetric cylinder of the matching rank
      const auto* sft = static_cast<const systems::Sft*>(&sys);
      int n = static_cast<int>(std::ceil(-std::log2(r)));
      if (std::ldexp(1.0, -n) > r) ++n;
      while (std::ldexp(1.0, -(n - 1)) <= r) --n;  // 2^-n <= r < 2^-(n-1)
      const auto& p = std::get<systems::SftPoint>(x);
      if (p.depth < n - 1) throw truncation_too_shallow("window too short for the cylinder rank");
      std::vector<int> w(2 * n - 1);
      for (int i = -(n - 1); i <= n - 1; ++i) w[i + n - 1] = p.at(i);
      auto cyl = symdyn::cylinder_measure(sft->base_parry(), sft->base_matrix(), w);
      out.estimate = cyl.measure;
      out.ci_lo = out.ci_hi = cyl.measure;
      out.exact = true;
      return out;
    }
    case Kind::Horseshoe:
      return horseshoe_quadrature(static_cast<const systems::Horseshoe&>(sys), x, r);
    case Kind::CatMap:
    case Kind::Solenoid: {
      if (covers.empty()) throw config_error("stratified sampling needs built covers");
      // stratify over the rectangles meeting the ball at the finest level
      // whose diameter resolves r; importance weights are the Parry measures
      size_t li = covers.size() - 1;
      for (size_t i = 0; i < covers.size(); ++i)
        if (covers[i].geom->diam_max() <= r) {
          li = i;
          break;
        }
      const auto& cov = covers[li];
      auto strata = cov.geom->meeting_ball(x, r);
      if (strata.empty()) {
        out.estimate = 0;
        out.ci_lo = out.ci_hi = 0;
        return out;
      }
      int per = std::max(24, static_cast<int>(n_samples / strata.size()));
      std::vector<double> est(strata.size()), var(strata.size());
      parallel_for(strata.size(), [&](size_t si) {
        Rng rng(seed, 1000 + si);
        int k = strata[si];
        double w = cov.geom->rect_measure(k);
        int hits = 0;
        for (int t = 0; t < per; ++t) {
          Point y = cov.geom->sample_point(k, rng);
          if (sys.dist(x, y) <= r) ++hits;
        }
        double ph = static_cast<double>(hits) / per;
        est[si] = w * ph;
        var[si] = w * w * ph * (1 - ph) / per;
      });
      double total = 0, v = 0;
      for (size_t si = 0; si < strata.size(); ++si) {
        total += est[si];
        v += var[si];
      }
      out.estimate = total;
      double half = 2.576 * std::sqrt(v);
      out.ci_lo = std::max(0.0, total - half);
      out.ci_hi = total + half;
      return out;
    }
  }
  throw config_error("unknown system kind");
}

RegularityReport ahlfors_fit(const SmaleSystem& sys, const std::vector<RefinedCover>& covers,
                             double s_target, const std::vector<Point>& centers,
                             const std::vector<double>& radii, int n_samples, uint64_t seed,
                             double s_tol, double spread_tol) {
  if (centers.size() < 20) throw insufficient_scales("need at least 20 centers");
  if (radii.size() < 4) throw insufficient_scales("need at least 4 radii");
  double lo = *std::min_element(radii.begin(), radii.end());
  double hi = *std::max_element(radii.begin(), radii.end());
  if (std::log2(hi / lo) < 3 - 1e-9) throw insufficient_scales("radii span fewer than 3 dyadic scales");

  RegularityReport rep;
  rep.s_target = s_target;

  struct Row {
    double x, y;
    int center;
  };
  std::vector<Row> rows;
  std::vector<std::vector<RegularityProbe>> probes_per(centers.size());
  parallel_for(centers.size(), [&](size_t ci) {
    for (double r : radii) {
      auto bm = ball_measure(sys, covers, centers[ci], r, n_samples, seed + 31 * ci);
      RegularityProbe p;
      p.center = static_cast<int>(ci);
      p.r = r;
      p.mu = bm.estimate;
      p.ci_lo = bm.ci_lo;
      p.ci_hi = bm.ci_hi;
      probes_per[ci].push_back(p);
    }
  });
  for (auto& v : probes_per)
    for (auto& p : v) {
      rep.probes.push_back(p);
      if (p.mu > 0) rows.push_back({std::log2(p.r), std::log2(p.mu), p.center});
    }

  // pooled least-squares slope in log2 coordinates
  auto ls_slope = [](const std::vector<Row>& rs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rs) {
      sx += r.x;
      sy += r.y;
      sxx += r.x * r.x;
      sxy += r.x * r.y;
    }
    double n = static_cast<double>(rs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  rep.s_hat = ls_slope(rows);

  // Ahlfors envelope: C_hat = max multiplicative deviation from r^{s_hat}
  double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.y - rep.s_hat * r.x));
  rep.c_hat = std::exp2(worst);

  // per-ball slopes and their spread
  for (size_t ci = 0; ci < centers.size(); ++ci) {
    std::vector<Row> mine;
    for (const auto& r : rows)
      if (r.center == static_cast<int>(ci)) mine.push_back(r);
    if (mine.size() >= 2) rep.ball_slopes.push_back(ls_slope(mine));
  }
  if (!rep.ball_slopes.empty()) {
    auto [mn, mx] = std::minmax_element(rep.ball_slopes.begin(), rep.ball_slopes.end());
    rep.spread = *mx - *mn;
  }
  bool pass = std::abs(rep.s_hat - s_target) <= s_tol && rep.spread <= spread_tol;
  rep.verdict = pass ? "PASS" : "FAIL";
  return rep;
}

namespace {

BoxDimension slopes_from(const std::vector<double>& x, const std::vector<double>& y) {
  BoxDimension out;
  out.lower_slope = std::numeric_limits<double>::infinity();
  out.upper_slope = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    double s = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    out.lower_slope = std::min(out.lower_slope, s);
    out.upper_slope = std::max(out.upper_slope, s);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  out.fitted = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace

BoxDimension box_dimension(const symdyn::TransitionMatrix& m, int depth) {
  if (depth < 4) throw insufficient_scales("need at least 4 scales");
  std::vector<double> x, y;
  for (int n = 1; n <= depth; ++n) {
    // N_delta at delta = 2^{-n} equals the symmetric cylinder count
    auto c = symdyn::count_words(m, 2 * n - 1);
    x.push_back(n);  // -log2 delta
    y.push_back(std::log2(c.convert_to<double>()));
  }
  return slopes_from(x, y);
}

BoxDimension box_dimension(const std::vector<RefinedCover>& covers) {
  if (covers.size() < 4) throw insufficient_scales("need at least 4 scales");
  std::vector<double> x, y;
  for (const auto& c : covers) {
    x.push_back(-std::log2(c.geom->diam_max()));
    y.push_back(std::log2(static_cast<double>(c.count())));
  }
  return slopes_from(x, y);
}

double assouad_estimate(const SmaleSystem& sys, const std::vector<Point>& cloud,
                        const std::vector<std::pair<double, double>>& scale_pairs) {
  if (cloud.size() < 1000) throw config_error("cloud must have at least 10^3 points");
  double best = 0;
  for (auto [a, b] : scale_pairs) {
    if (!(b / a >= 4)) throw config_error("scale pairs need b/a >= 4");
    int max_count = 0;
    const size_t n_centers = std::min<size_t>(cloud.size(), 48);
    std::vector<int> counts(n_centers, 0);
    if (sys.kind() == Kind::Sft) {
      // ultrametric: a maximal a-separated subset keeps one point per
      // central word of the matching rank, so greedy reduces to dedup;
      // distinct words on |i| <= H separate by 2^-H >= a
      const int half = static_cast<int>(std::floor(std::log2(1.0 / a) + 1e-9));
      parallel_for(n_centers, [&](size_t ci) {
        const Point& c = cloud[ci * (cloud.size() / n_centers)];
        std::set<std::vector<int>> cells;
        for (const auto& p : cloud) {
          if (sys.dist(c, p) > b) continue;
          const auto& sp = std::get<systems::SftPoint>(p);
          if (sp.depth < half) continue;
          std::vector<int> w(2 * half + 1);
          for (int i = -half; i <= half; ++i) w[i + half] = sp.at(i);
          cells.insert(std::move(w));
        }
        counts[ci] = static_cast<int>(cells.size());
      });
    } else {
      // greedy maximal a-separated subsets of b-balls centred on cloud points
      parallel_for(n_centers, [&](size_t ci) {
        const Point& c = cloud[ci * (cloud.size() / n_centers)];
        std::vector<const Point*> kept;
        for (const auto& p : cloud) {
          if (sys.dist(c, p) > b) continue;
          bool ok = true;
          for (const Point* q : kept)
            if (sys.dist(p, *q) < a) {
              ok = false;
              break;
            }
          if (ok) kept.push_back(&p);
        }
        counts[ci] = static_cast<int>(kept.size());
      });
    }
    for (int v : counts) max_count = std::max(max_count, v);
    if (max_count > 0) best = std::max(best, std::log2(static_cast<double>(max_count)) / std::log2(b / a));
  }
  return best;
}

double doubling_constant(const SmaleSystem& sys, const std::vector<RefinedCover>& covers,
                         const std::vector<Point>& centers, const std::vector<double>& radii,
                         int n_samples, uint64_t seed) {
  double worst = 0;
  for (double r : radii) {
    if (!(2 * r < sys.constants().diameter)) throw config_error("need 2r < diam X");
    for (size_t ci = 0; ci < centers.size(); ++ci) {
      auto small = ball_measure(sys, covers, centers[ci], r, n_samples, seed + 7 * ci);
      auto big = ball_measure(sys, covers, centers[ci], 2 * r, n_samples, seed + 7 * ci + 3);
      if (small.estimate > 0) worst = std::max(worst, big.estimate / small.estimate);
    }
  }
  return worst;
}

BoundsReport dimension_bounds(double h, double lambda, double Lambda) {
  if (!(Lambda < std::numeric_limits<double>::infinity())) throw config_error("Lambda must be finite");
  BoundsReport out;
  out.h = h;
  out.lambda = lambda;
  out.Lambda = Lambda;
  out.A_upper = Lambda * lambda / (lambda * lambda - 1);
  out.A_lower = lambda / (2 * Lambda);
  out.lower_dim = 2 * h / std::log(Lambda);
  out.applicable = lambda > 2 * out.A_upper;
  if (out.applicable) out.upper_dim = 2 * h / (std::log(lambda) - std::log(2 * out.A_upper));
  return out;
}

}  // namespace smalelab::dims
