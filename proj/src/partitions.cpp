#include "smalelab/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "smalelab/parallel.hpp"

namespace smalelab::partitions {

using systems::CatMap;
using systems::Horseshoe;
using systems::K5;
using systems::Kind;
using systems::Point;
using systems::SmaleSystem;
using systems::Solenoid;

double Geometry::diam_max() const {
  double d = 0;
  for (int k = 0; k < count(); ++k) d = std::max(d, diam(k));
  return d;
}

double Geometry::diam_min() const {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count(); ++k) d = std::min(d, diam(k));
  return d;
}

int Geometry::max_neighbours() const {
  std::vector<int> per(count());
  parallel_for(count(), [&](size_t k) { per[k] = static_cast<int>(neighbors(static_cast<int>(k)).size()); });
  int best = 0;
  for (int v : per) best = std::max(best, v);
  return best;
}

namespace {

// ---------------------------------------------------------------------------
// shift geometry: rectangles are the symmetric cylinders themselves
// ---------------------------------------------------------------------------

class SftGeometry final : public Geometry {
public:
  SftGeometry(const systems::Sft* sys, int level, std::shared_ptr<const WordList> words)
      : sys_(sys), level_(level), words_(std::move(words)) {
    for (size_t i = 0; i < words_->size(); ++i) index_[(*words_)[i]] = static_cast<int>(i);
  }

  int count() const override { return static_cast<int>(words_->size()); }
  double diam(int) const override { return std::ldexp(1.0, -level_); }
  bool touches(int a, int b) const override { return a == b; }
  std::vector<int> neighbors(int k) const override { return {k}; }
  int multiplicity() const override { return 1; }

  std::vector<int> containing(const Point& x, double) const override {
    auto it = index_.find(central_word(x));
    if (it == index_.end()) return {};
    return {it->second};
  }

  std::vector<int> meeting_ball(const Point& x, double r) const override {
    const auto& p = std::get<systems::SftPoint>(x);
    std::vector<int> out;
    const int n = level_;
    for (int k = 0; k < count(); ++k) {
      const auto& w = (*words_)[k];
      int j = 0;
      bool inside = true;
      for (; j <= n - 1 && j <= p.depth; ++j) {
        if (p.at(j) != w[j + n - 1] || p.at(-j) != w[-j + n - 1]) {
          inside = false;
          break;
        }
      }
      double d = inside ? 0.0 : std::ldexp(1.0, -j);
      if (d <= r * (1 + 1e-12)) out.push_back(k);
    }
    return out;
  }

  double dist_to_complement(const Point& x, int k) const override {
    auto c = containing(x, 0);
    if (c.empty() || c[0] != k) return 0.0;
    return std::ldexp(1.0, -(level_ - 1));
  }

  Point sample_point(int k, Rng& rng) const override {
    const auto& mu = sys_->base_parry();
    const auto& P = mu.P;
    const auto& w = (*words_)[k];
    const int n = level_;
    const int K = std::max(sys_->point_depth(), n);
    systems::SftPoint p;
    p.depth = K;
    p.window.assign(2 * K + 1, 0);
    for (int i = -(n - 1); i <= n - 1; ++i) p.window[i + K] = w[i + n - 1];
    int s = w.back() - 1;
    for (int i = n; i <= K; ++i) {
      s = rng.pick_weighted(P[s].data(), static_cast<int>(P[s].size()));
      p.window[i + K] = s + 1;
    }
    // backward extension by the reversed chain, q_j = p_j P_{ji} / p_i
    int t = w.front() - 1;
    const int N = static_cast<int>(mu.p.size());
    std::vector<double> back(N);
    for (int i = n; i <= K; ++i) {
      for (int j = 0; j < N; ++j) back[j] = mu.p[j] * P[j][t] / mu.p[t];
      t = rng.pick_weighted(back.data(), N);
      p.window[-i + K] = t + 1;
    }
    return p;
  }

  double rect_measure(int k) const override {
    return symdyn::cylinder_measure(sys_->base_parry(), sys_->base_matrix(), (*words_)[k]).measure;
  }

  std::vector<int> central_word(const Point& x) const {
    const auto& p = std::get<systems::SftPoint>(x);
    std::vector<int> w(2 * level_ - 1);
    for (int i = -(level_ - 1); i <= level_ - 1; ++i) w[i + level_ - 1] = p.at(i);
    return w;
  }

  // descendants of a shallower cylinder (touching = containment here)
  std::vector<int> touching_word(const std::vector<int>& w) const {
    const int off = (static_cast<int>((*words_)[0].size()) - static_cast<int>(w.size())) / 2;
    std::vector<int> out;
    for (size_t j = 0; j < words_->size(); ++j) {
      bool ok = true;
      for (size_t t = 0; t < w.size(); ++t)
        if ((*words_)[j][t + off] != w[t]) {
          ok = false;
          break;
        }
      if (ok) out.push_back(static_cast<int>(j));
    }
    return out;
  }

private:
  const systems::Sft* sys_;
  int level_;
  std::shared_ptr<const WordList> words_;
  std::map<std::vector<int>, int> index_;
};

// ---------------------------------------------------------------------------
// cat-map geometry: exact interval boxes in eigen-coordinates
// ---------------------------------------------------------------------------

class CatGeometry final : public Geometry {
public:
  // expansion e = (ea + eb sqrt5)/eden applied at the base level, scaled down
  // by phi^{-2(n-1)} per refinement level; e = 0 gives the closed partition
  CatGeometry(const CatMap* sys, int level, std::vector<CatMap::Box> base_boxes, long long ea,
              long long eb, long long eden)
      : sys_(sys), level_(level), base_(std::move(base_boxes)) {
    CatMap::scale_by_phi_power(ea, eb, eden, -(level - 1));
    open_ = K5::sign(ea, eb) > 0;
    exp_d_ = open_ ? (static_cast<double>(ea) + eb * 2.2360679774997896) / eden : 0.0;
    if (open_) {
      boxes_.reserve(base_.size());
      for (const auto& b : base_) boxes_.push_back(CatMap::expanded(b, ea, eb, eden));
    } else {
      boxes_ = base_;
    }
    build_grid();
  }

  int count() const override { return static_cast<int>(boxes_.size()); }

  double diam(int k) const override {
    const auto& b = boxes_[k];
    double lift = CatMap::eig_scale() * std::hypot(b.xhi - b.xlo, b.yhi - b.ylo);
    if (lift < 0.45) return lift;  // small boxes cannot wrap
    return std::min(lift, torus_corner_diam(b));
  }

  bool touches(int a, int b) const override {
    if (a == b) return true;
    for (int m = -2; m <= 2; ++m)
      for (int n = -2; n <= 2; ++n)
        if (overlap(a, b, m, n)) return true;
    return false;
  }

  std::vector<int> neighbors(int k) const override {
    std::vector<int> out;
    const auto& b = boxes_[k];
    for (auto [j, m, n] : region_candidates(b.xlo, b.xhi, b.ylo, b.yhi))
      if (overlap(k, j, m, n)) out.push_back(j);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  int multiplicity() const override {
    // exact point-location at rectangle corners; for interval boxes the
    // maximum of the nerve is attained at corners of the arrangement
    std::vector<int> per(boxes_.size());
    parallel_for(boxes_.size(), [&](size_t k) {
      int local = 0;
      const auto& b = base_[k];
      for (const K5& cx : {b.x0, b.x1})
        for (const K5& cy : {b.y0, b.y1})
          local = std::max(local, count_containing_exact(cx, cy, b.den));
      per[k] = local;
    });
    int best = 0;
    for (int v : per) best = std::max(best, v);
    return best;
  }

  std::vector<int> containing(const Point& x, double tol) const override {
    double xi, eta;
    sys_->torus_to_eig(std::get<systems::TorusPoint>(x), xi, eta);
    std::vector<int> out;
    for (auto [j, m, n] : region_candidates(xi - tol, xi + tol, eta - tol, eta + tol)) {
      double vx = m * e1x_ + n * e2x_, vy = m * e1y_ + n * e2y_;
      double px = xi - vx, py = eta - vy;
      const auto& b = boxes_[j];
      bool in = open_ ? (px > b.xlo - tol && px < b.xhi + tol && py > b.ylo - tol && py < b.yhi + tol)
                      : (px >= b.xlo - tol && px <= b.xhi + tol && py >= b.ylo - tol && py <= b.yhi + tol);
      if (in) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<int> meeting_ball(const Point& x, double r) const override {
    double xi, eta;
    sys_->torus_to_eig(std::get<systems::TorusPoint>(x), xi, eta);
    const double L = CatMap::eig_scale();
    const double re = r / L;  // radius in eigen units
    std::vector<int> out;
    for (auto [j, m, n] : region_candidates(xi - re, xi + re, eta - re, eta + re)) {
      double vx = m * e1x_ + n * e2x_, vy = m * e1y_ + n * e2y_;
      double px = xi - vx, py = eta - vy;
      const auto& b = boxes_[j];
      double dx = std::max({b.xlo - px, px - b.xhi, 0.0});
      double dy = std::max({b.ylo - py, py - b.yhi, 0.0});
      if (L * std::hypot(dx, dy) <= r * (1 + 1e-12) + 1e-15) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  double dist_to_complement(const Point& x, int k) const override {
    double xi, eta;
    sys_->torus_to_eig(std::get<systems::TorusPoint>(x), xi, eta);
    const auto& b = boxes_[k];
    double best = -1e99;
    for (int m = -2; m <= 2; ++m)
      for (int n = -2; n <= 2; ++n) {
        double vx = m * e1x_ + n * e2x_, vy = m * e1y_ + n * e2y_;
        double px = xi - vx, py = eta - vy;
        double margin = std::min(std::min(px - b.xlo, b.xhi - px), std::min(py - b.ylo, b.yhi - py));
        best = std::max(best, margin);
      }
    return std::max(0.0, best * CatMap::eig_scale());
  }

  Point sample_point(int k, Rng& rng) const override {
    const auto& b = boxes_[k];
    double xi = rng.uniform(b.xlo, b.xhi);
    double eta = rng.uniform(b.ylo, b.yhi);
    return sys_->eig_to_torus(xi, eta);
  }

  double rect_measure(int k) const override {
    const auto& b = base_[k];
    return (b.xhi - b.xlo) * (b.yhi - b.ylo) * CatMap::eig_scale_sq().approx();
  }

  // ---- exact helpers used by the fattening machinery ----

  bool base_swallowed_by(int a, const CatGeometry& fat, int b) const {
    const auto& A = base_[a];
    for (int m = -2; m <= 2; ++m)
      for (int n = -2; n <= 2; ++n)
        if (CatMap::box_subset_strict(A, CatMap::translated(fat.boxes_[b], m, n))) return true;
    return false;
  }

  std::vector<int> touching_box(const CatMap::Box& q) const {
    std::vector<int> out;
    for (auto [j, m, n] : region_candidates(q.xlo, q.xhi, q.ylo, q.yhi)) {
      CatMap::Box t = CatMap::translated(boxes_[j], m, n);
      bool hit = open_ ? CatMap::box_overlap_open(q, t) : CatMap::box_overlap_closed(q, t);
      if (hit) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  int count_containing_exact(K5 px, K5 py, long long pden) const {
    int cnt = 0;
    double pxd = (px.a + px.b * 2.2360679774997896) / pden;
    double pyd = (py.a + py.b * 2.2360679774997896) / pden;
    for (auto [j, m, n] : region_candidates(pxd, pxd, pyd, pyd)) {
      // shift the point by -v instead of the box by +v
      long long f = pden / 10;
      if (pden % 10 != 0) throw AuditError("CatExact", "point denominator not divisible by 10");
      K5 qx{px.a - (m * 0LL + n * 5LL) * f, px.b - (m * 2LL + n * -1LL) * f};
      K5 qy{py.a - (m * 5LL + n * 0LL) * f, py.b - (m * -1LL + n * -2LL) * f};
      const auto& b = boxes_[j];
      bool in = open_ ? CatMap::box_contains_open(b, qx, qy, pden)
                      : CatMap::box_contains_closed(b, qx, qy, pden);
      if (in) ++cnt;
    }
    return cnt;
  }

  const std::vector<CatMap::Box>& boxes() const { return boxes_; }
  const std::vector<CatMap::Box>& base_boxes() const { return base_; }
  const CatMap* system() const { return sys_; }
  bool is_open() const { return open_; }

  // candidate (box, m, n) triples whose translate can meet the query region
  std::vector<std::tuple<int, int, int>> region_candidates(double xlo, double xhi, double ylo,
                                                           double yhi) const {
    std::vector<std::tuple<int, int, int>> out;
    for (int m = -2; m <= 2; ++m)
      for (int n = -2; n <= 2; ++n) {
        double vx = m * e1x_ + n * e2x_, vy = m * e1y_ + n * e2y_;
        auto ix0 = static_cast<int64_t>(std::floor((xlo - vx - cell_) / cell_));
        auto ix1 = static_cast<int64_t>(std::floor((xhi - vx + cell_) / cell_));
        auto iy0 = static_cast<int64_t>(std::floor((ylo - vy - cell_) / cell_));
        auto iy1 = static_cast<int64_t>(std::floor((yhi - vy + cell_) / cell_));
        for (int64_t ix = ix0; ix <= ix1; ++ix)
          for (int64_t iy = iy0; iy <= iy1; ++iy) {
            auto it = grid_.find(ix * 1000003 + iy);
            if (it != grid_.end())
              for (int j : it->second) out.emplace_back(j, m, n);
          }
      }
    return out;
  }

private:
  bool overlap(int a, int b, int m, int n) const {
    if (a == b && m == 0 && n == 0) return true;
    const auto& A = boxes_[a];
    const auto& B = boxes_[b];
    double vx = m * e1x_ + n * e2x_, vy = m * e1y_ + n * e2y_;
    double gx = std::max(B.xlo + vx - A.xhi, A.xlo - (B.xhi + vx));
    double gy = std::max(B.ylo + vy - A.yhi, A.ylo - (B.yhi + vy));
    double g = std::max(gx, gy);
    if (g > 1e-9) return false;
    if (g < -1e-9) return true;
    CatMap::Box T = CatMap::translated(B, m, n);
    return open_ ? CatMap::box_overlap_open(A, T) : CatMap::box_overlap_closed(A, T);
  }

  double torus_corner_diam(const CatMap::Box& b) const {
    double corners[4][2] = {{b.xlo, b.ylo}, {b.xlo, b.yhi}, {b.xhi, b.ylo}, {b.xhi, b.yhi}};
    double reduced = 0;
    for (auto& p : corners)
      for (auto& r : corners) {
        double dx = p[0] - r[0], dy = p[1] - r[1];
        double best = 1e99;
        for (int m = -1; m <= 1; ++m)
          for (int n = -1; n <= 1; ++n)
            best = std::min(best, std::hypot(dx + m * e1x_ + n * e2x_, dy + m * e1y_ + n * e2y_));
        reduced = std::max(reduced, best);
      }
    return CatMap::eig_scale() * reduced;
  }

  void build_grid() {
    double wmax = 0;
    for (const auto& b : boxes_) {
      wmax = std::max(wmax, b.xhi - b.xlo);
      wmax = std::max(wmax, b.yhi - b.ylo);
    }
    cell_ = std::max(wmax, 1e-6) * 1.01;
    for (size_t k = 0; k < boxes_.size(); ++k) {
      const auto& b = boxes_[k];
      auto ix = static_cast<int64_t>(std::floor(0.5 * (b.xlo + b.xhi) / cell_));
      auto iy = static_cast<int64_t>(std::floor(0.5 * (b.ylo + b.yhi) / cell_));
      grid_[ix * 1000003 + iy].push_back(static_cast<int>(k));
    }
  }

  const CatMap* sys_;
  int level_;
  std::vector<CatMap::Box> base_;   // closed partition rectangles
  std::vector<CatMap::Box> boxes_;  // effective rectangles (expanded when open)
  bool open_ = false;
  double exp_d_ = 0;
  double cell_ = 1;
  double e1x_ = 0.4472135954999579, e1y_ = 0.2763932022500210;
  double e2x_ = 0.2763932022500210, e2y_ = -0.4472135954999579;
  std::unordered_map<int64_t, std::vector<int>> grid_;
};

// ---------------------------------------------------------------------------
// solenoid geometry: dyadic angle interval times fixed root bits
// ---------------------------------------------------------------------------

class SolenoidGeometry final : public Geometry {
public:
  struct Rect {
    double lo = 0;           // dyadic left endpoint, multiple of the length
    double len = 0;          // 2^{1-n'}
    std::vector<uint8_t> c;  // root bits c_1..c_{n'}
  };

  SolenoidGeometry(const Solenoid* sys, int level, std::vector<Rect> rects, double t_expand)
      : sys_(sys), level_(level), rects_(std::move(rects)), t_(t_expand) {
    nprime_ = level_ + sys_->base_halfwidth() - 1;
    cells_ = 1 << (nprime_ - 1);
    bucket_.resize(cells_);
    for (size_t k = 0; k < rects_.size(); ++k)
      bucket_[cell_of(rects_[k].lo)].push_back(static_cast<int>(k));

    Rng rng(20240801, static_cast<uint64_t>(level_) * 2 + (t_ > 0 ? 1 : 0));
    std::vector<Point> pts;
    for (int i = 0; i < 96; ++i) pts.push_back(sample_point(0, rng));
    for (size_t a = 0; a < pts.size(); ++a)
      for (size_t b = a + 1; b < pts.size(); ++b) diam_ = std::max(diam_, sys_->dist(pts[a], pts[b]));
    diam_ += 2 * theta_norm() * t_;

    flip_cost_.assign(nprime_ + 1, 0.0);
    for (int j = 1; j <= nprime_; ++j) {
      double s = 0;
      for (int k = 0; j + k <= sys_->depth(); ++k)
        s += std::ldexp(1.0, -(j + k)) * std::ldexp(0.5, -k);
      flip_cost_[j] = s;
    }
  }

  int count() const override { return static_cast<int>(rects_.size()); }
  double diam(int) const override { return diam_; }

  bool touches(int a, int b) const override {
    if (a == b) return true;
    return touch_one_sided(a, b) || touch_one_sided(b, a);
  }

  std::vector<int> neighbors(int k) const override {
    std::vector<int> out;
    for (int j : nearby(rects_[k].lo))
      if (touches(k, j)) out.push_back(j);
    std::sort(out.begin(), out.end());
    return out;
  }

  int multiplicity() const override {
    int best = 0;
    for (int k = 0; k < count(); ++k) {
      const auto& r = rects_[k];
      for (double theta : {r.lo, r.lo + r.len, r.lo + 0.5 * r.len}) {
        Point p = make_point(theta, r.c);
        best = std::max(best, static_cast<int>(containing(p, 0).size()));
      }
    }
    return best;
  }

  std::vector<int> containing(const Point& x, double tol) const override {
    const auto& p = std::get<systems::SolenoidPoint>(x);
    std::vector<int> out;
    for (int j : nearby(p.theta))
      if (member(p, rects_[j], tol)) out.push_back(j);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> meeting_ball(const Point& x, double r) const override {
    const auto& p = std::get<systems::SolenoidPoint>(x);
    std::vector<int> out;
    for (int k = 0; k < count(); ++k) {
      if (angle_gap(p.theta, rects_[k]) > r + 2 * t_) continue;  // theta term alone exceeds r
      systems::SolenoidPoint y;
      y.theta = clamp_angle(p.theta, rects_[k]);
      y.bits = p.bits;
      for (int j = 1; j <= nprime_; ++j) y.bits[j - 1] = rects_[k].c[j - 1];
      if (sys_->dist(Point{p}, Point{y}) <= r * (1 + 1e-9)) out.push_back(k);
    }
    return out;
  }

  double dist_to_complement(const Point& x, int k) const override {
    const auto& p = std::get<systems::SolenoidPoint>(x);
    const auto& rect = rects_[k];
    if (t_ <= 0) return 0.0;  // closed covers share boundaries
    if (!member(p, rect, 0)) return 0.0;
    double lo = rect.lo - t_, hi = rect.lo + rect.len + t_;
    double margin = std::min(wrapped_pos(p.theta - lo), wrapped_pos(hi - p.theta));
    double best = theta_norm() * margin;
    for (int j = 1; j <= nprime_; ++j) best = std::min(best, flip_cost_[j]);
    return best;
  }

  Point sample_point(int k, Rng& rng) const override {
    const auto& rect = rects_[k];
    systems::SolenoidPoint p;
    double u = 0;
    for (int b = 1; b <= 30; ++b) u += std::ldexp(static_cast<double>(rng.next() & 1), -b);
    p.theta = rect.lo + rect.len * u;
    if (p.theta >= 1) p.theta -= 1;
    p.bits.resize(sys_->depth());
    for (int j = 1; j <= sys_->depth(); ++j)
      p.bits[j - 1] = (j <= nprime_) ? rect.c[j - 1] : static_cast<uint8_t>(rng.next() & 1);
    return p;
  }

  double rect_measure(int) const override { return std::ldexp(1.0, -(2 * nprime_ - 1)); }

  const std::vector<Rect>& rects() const { return rects_; }
  int nprime() const { return nprime_; }
  double expansion() const { return t_; }
  double theta_norm() const {
    double s = 0;
    for (int n = 0; n <= sys_->depth(); ++n) s += std::ldexp(1.0, -2 * n);
    return s;
  }

  Point make_point(double theta, const std::vector<uint8_t>& c) const {
    systems::SolenoidPoint p;
    p.theta = theta >= 1 ? theta - 1 : theta;
    p.bits.resize(sys_->depth());
    for (int j = 1; j <= sys_->depth(); ++j) p.bits[j - 1] = (j <= nprime_) ? c[j - 1] : 0;
    return p;
  }

  // Rectangles are proper: a boundary point belongs only when interior points
  // approach it along one of the two flow directions. The upward flow keeps
  // the point's own root bits; the downward flow sees the borrow pattern
  // (zero prefix flipped to ones, the first one-bit cleared) when the angles
  // sit on the branch locus theta = 0.
  bool member(const systems::SolenoidPoint& p, const Rect& rect, double tol) const {
    if (t_ > 0) return fat_member(p, rect, tol);
    bool theta_plus = false, theta_minus = false;
    for (double shift : {0.0, 1.0, -1.0}) {
      double v = p.theta + shift;
      if (v > rect.lo + tol && v < rect.lo + rect.len - tol) theta_plus = theta_minus = true;
      if (std::abs(v - rect.lo) <= tol) theta_plus = true;
      if (std::abs(v - (rect.lo + rect.len)) <= tol) theta_minus = true;
    }
    if (!theta_plus && !theta_minus) return false;
    if (theta_plus && bits_match(p, rect, false, tol)) return true;
    if (theta_minus && bits_match(p, rect, true, tol)) return true;
    return false;
  }

  bool bits_match(const systems::SolenoidPoint& p, const Rect& rect, bool minus, double tol) const {
    if (!minus) {
      for (int j = 1; j <= nprime_; ++j)
        if (rect.c[j - 1] != p.bits[j - 1]) return false;
      return true;
    }
    // borrow pattern applies only on the branch locus
    bool on_zero = std::abs(p.theta) <= tol || std::abs(p.theta - 1) <= tol;
    if (!on_zero) return bits_match(p, rect, false, tol);
    int first_one = nprime_ + 1;
    for (int j = 1; j <= nprime_; ++j)
      if (p.bits[j - 1]) {
        first_one = j;
        break;
      }
    for (int j = 1; j <= nprime_; ++j) {
      uint8_t want = p.bits[j - 1];
      if (j < first_one) want = 1;
      if (j == first_one) want = 0;
      if (rect.c[j - 1] != want) return false;
    }
    return true;
  }

  // shift the whole thread by t: angles move by t / 2^n, bits recomputed
  systems::SolenoidPoint flowed(const systems::SolenoidPoint& p, double t) const {
    systems::SolenoidPoint out;
    double z = p.theta + t;
    z -= std::floor(z);
    out.theta = z;
    out.bits.resize(p.bits.size());
    double prev_old = p.theta, prev_new = z, a = p.theta;
    double scale = 0.5;
    for (size_t j = 1; j <= p.bits.size(); ++j) {
      a = (a + p.bits[j - 1]) / 2.0;
      double zn = a + t * scale;
      zn -= std::floor(zn);
      double c = 2.0 * zn - prev_new;
      long ci = std::lround(c);
      out.bits[j - 1] = static_cast<uint8_t>(((ci % 2) + 2) % 2);
      prev_old = a;
      prev_new = zn;
      scale *= 0.5;
    }
    (void)prev_old;
    return out;
  }

  bool fat_member(const systems::SolenoidPoint& p, const Rect& rect, double tol) const {
    // open fattening along the flow: some |t'| < t_ carries p into the rect
    std::vector<double> cands{0.0};
    for (double shift : {0.0, 1.0, -1.0}) {
      cands.push_back(rect.lo - (p.theta + shift));
      cands.push_back(rect.lo + rect.len - (p.theta + shift));
    }
    for (double t : cands) {
      if (std::abs(t) >= t_ - tol && t != 0.0) continue;
      auto q = (t == 0.0) ? p : flowed(p, t);
      // closed-rectangle test on the flowed point
      bool theta_plus = false, theta_minus = false;
      for (double shift : {0.0, 1.0, -1.0}) {
        double v = q.theta + shift;
        if (v > rect.lo + tol && v < rect.lo + rect.len - tol) theta_plus = theta_minus = true;
        if (std::abs(v - rect.lo) <= tol) theta_plus = true;
        if (std::abs(v - (rect.lo + rect.len)) <= tol) theta_minus = true;
      }
      if (!theta_plus && !theta_minus) continue;
      if (theta_plus && bits_match(q, rect, false, tol)) return true;
      if (theta_minus && bits_match(q, rect, true, tol)) return true;
    }
    return false;
  }

private:
  static double wrapped_pos(double t) {
    t -= std::floor(t);
    return t;
  }

  static double angle_diff(double a, double b) {
    double t = std::abs(a - b);
    t -= std::floor(t);
    return std::min(t, 1.0 - t);
  }

  double angle_gap(double theta, const Rect& r) const {
    double best = 1e99;
    for (double shift : {-1.0, 0.0, 1.0}) {
      double v = theta + shift;
      if (v >= r.lo && v <= r.lo + r.len) return 0.0;
      best = std::min(best, std::min(std::abs(v - r.lo), std::abs(v - (r.lo + r.len))));
    }
    return best;
  }

  double clamp_angle(double theta, const Rect& rect) const {
    for (double shift : {0.0, 1.0, -1.0}) {
      double v = theta + shift;
      if (v >= rect.lo && v <= rect.lo + rect.len) return theta;
    }
    double lo = rect.lo, hi = rect.lo + rect.len;
    double cand = angle_diff(theta, lo) <= angle_diff(theta, hi) ? lo : hi;
    return cand >= 1 ? cand - 1 : cand;
  }

  int cell_of(double lo) const {
    auto c = static_cast<int64_t>(std::llround(lo * cells_));
    return static_cast<int>(((c % cells_) + cells_) % cells_);
  }

  std::vector<int> nearby(double theta) const {
    int c = static_cast<int>(std::floor(wrapped_pos(theta) * cells_));
    std::vector<int> cells;
    for (int d = -1; d <= 1; ++d) {
      int cc = ((c + d) % cells_ + cells_) % cells_;
      if (std::find(cells.begin(), cells.end(), cc) == cells.end()) cells.push_back(cc);
    }
    std::vector<int> out;
    for (int cc : cells) out.insert(out.end(), bucket_[cc].begin(), bucket_[cc].end());
    return out;
  }

  bool touch_one_sided(int a, int b) const {
    const auto& ra = rects_[a];
    const auto& rb = rects_[b];
    for (double theta : {ra.lo, ra.lo + ra.len, ra.lo + 0.5 * ra.len}) {
      Point p = make_point(theta, ra.c);
      const auto& sp = std::get<systems::SolenoidPoint>(p);
      if (member(sp, ra, 0) && member(sp, rb, 0)) return true;
    }
    return false;
  }

  const Solenoid* sys_;
  int level_;
  std::vector<Rect> rects_;
  double t_;  // theta fattening radius (0 for the closed partition)
  int nprime_;
  int cells_ = 1;
  double diam_ = 0;
  std::vector<double> flip_cost_;
  std::vector<std::vector<int>> bucket_;
};

// ---------------------------------------------------------------------------
// horseshoe geometry: separated product boxes
// ---------------------------------------------------------------------------

class HorseshoeGeometry final : public Geometry {
public:
  HorseshoeGeometry(const Horseshoe* sys, int level, std::shared_ptr<const WordList> words)
      : sys_(sys), level_(level), words_(std::move(words)) {
    for (const auto& w : *words_) boxes_.push_back(sys_->cylinder_box(w, 1 - level_));
  }

  int count() const override { return static_cast<int>(words_->size()); }

  double diam(int k) const override {
    const auto& c = boxes_[k];
    return std::sqrt((c.fx_hi - c.fx_lo) * (c.fx_hi - c.fx_lo) +
                     (c.fy_hi - c.fy_lo) * (c.fy_hi - c.fy_lo) +
                     (c.e_hi - c.e_lo) * (c.e_hi - c.e_lo));
  }

  bool touches(int a, int b) const override { return a == b; }
  std::vector<int> neighbors(int k) const override { return {k}; }
  int multiplicity() const override { return 1; }

  std::vector<int> containing(const Point& x, double tol) const override {
    auto p = sys_->embed(std::get<systems::HorseshoePoint>(x));
    std::vector<int> out;
    for (int k = 0; k < count(); ++k)
      if (inside(p, boxes_[k], tol)) out.push_back(k);
    return out;
  }

  std::vector<int> meeting_ball(const Point& x, double r) const override {
    auto p = sys_->embed(std::get<systems::HorseshoePoint>(x));
    std::vector<int> out;
    for (int k = 0; k < count(); ++k)
      if (box_dist(p, boxes_[k]) <= r * (1 + 1e-12)) out.push_back(k);
    return out;
  }

  double dist_to_complement(const Point& x, int k) const override {
    auto p = sys_->embed(std::get<systems::HorseshoePoint>(x));
    if (!inside(p, boxes_[k], 0)) return 0.0;
    double best = 1e99;
    for (int j = 0; j < count(); ++j)
      if (j != k) best = std::min(best, box_dist(p, boxes_[j]));
    return best;
  }

  Point sample_point(int k, Rng& rng) const override {
    const auto& w = (*words_)[k];
    systems::HorseshoePoint p;
    const int K = sys_->point_depth();
    p.depth = K;
    p.window.resize(2 * K + 1);
    for (int i = -K; i <= K; ++i) {
      int rel = i - (1 - level_);
      if (rel >= 0 && rel < static_cast<int>(w.size()))
        p.window[i + K] = w[rel];
      else
        p.window[i + K] = 1 + static_cast<int>(rng.next() & 1);
    }
    return p;
  }

  double rect_measure(int) const override { return std::ldexp(1.0, -(2 * level_ - 1)); }

  std::vector<int> touching_word(const std::vector<int>& w) const {
    const int off = (static_cast<int>((*words_)[0].size()) - static_cast<int>(w.size())) / 2;
    std::vector<int> out;
    for (size_t j = 0; j < words_->size(); ++j) {
      bool ok = true;
      for (size_t t = 0; t < w.size(); ++t)
        if ((*words_)[j][t + off] != w[t]) {
          ok = false;
          break;
        }
      if (ok) out.push_back(static_cast<int>(j));
    }
    return out;
  }

private:
  static bool inside(const std::array<double, 3>& p, const Horseshoe::Cyl& c, double tol) {
    return p[0] >= c.fx_lo - tol && p[0] <= c.fx_hi + tol && p[1] >= c.fy_lo - tol &&
           p[1] <= c.fy_hi + tol && p[2] >= c.e_lo - tol && p[2] <= c.e_hi + tol;
  }
  static double box_dist(const std::array<double, 3>& p, const Horseshoe::Cyl& c) {
    double dx = std::max({c.fx_lo - p[0], p[0] - c.fx_hi, 0.0});
    double dy = std::max({c.fy_lo - p[1], p[1] - c.fy_hi, 0.0});
    double dz = std::max({c.e_lo - p[2], p[2] - c.e_hi, 0.0});
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  const Horseshoe* sys_;
  int level_;
  std::shared_ptr<const WordList> words_;
  std::vector<Horseshoe::Cyl> boxes_;
};

std::vector<SolenoidGeometry::Rect> solenoid_rects(const Solenoid& sol, int level,
                                                   const WordList& words) {
  const int m = sol.base_halfwidth();
  const int nprime = level + m - 1;
  std::vector<SolenoidGeometry::Rect> rects;
  rects.reserve(words.size());
  for (const auto& w : words) {
    std::vector<int> bits(2 * nprime - 1, 0);
    for (size_t kpos = 0; kpos < w.size(); ++kpos) {
      int i = static_cast<int>(kpos) - (level - 1);
      auto blk = sol.symbol_bits(w[kpos]);
      for (int t = -(m - 1); t <= m - 1; ++t) bits[i + t + nprime - 1] = blk[t + m - 1];
    }
    SolenoidGeometry::Rect r;
    r.len = std::ldexp(2.0, -nprime);
    double lo = 0;
    for (int k = 1; k <= nprime - 1; ++k)
      lo += std::ldexp(static_cast<double>(bits[-k + nprime - 1]), -k);
    r.lo = lo;
    r.c.resize(nprime);
    for (int j = 1; j <= nprime; ++j) r.c[j - 1] = static_cast<uint8_t>(bits[j - 1 + nprime - 1]);
    rects.push_back(std::move(r));
  }
  return rects;
}

std::shared_ptr<Geometry> realize_level(const SmaleSystem& sys, int level,
                                        const std::shared_ptr<const WordList>& words,
                                        const Geometry* parent_geom,
                                        const std::vector<int>& parent_of,
                                        const std::vector<std::pair<int, int>>& ext) {
  switch (sys.kind()) {
    case Kind::Sft:
      return std::make_shared<SftGeometry>(static_cast<const systems::Sft*>(&sys), level, words);
    case Kind::Horseshoe:
      return std::make_shared<HorseshoeGeometry>(static_cast<const Horseshoe*>(&sys), level, words);
    case Kind::Solenoid: {
      const auto* sol = static_cast<const Solenoid*>(&sys);
      return std::make_shared<SolenoidGeometry>(sol, level, solenoid_rects(*sol, level, *words), 0.0);
    }
    case Kind::CatMap: {
      const auto* cat = static_cast<const CatMap*>(&sys);
      std::vector<CatMap::Box> boxes(words->size());
      if (level == 1) {
        boxes = cat->base_boxes();
      } else {
        const auto* pg = dynamic_cast<const CatGeometry*>(parent_geom);
        if (!pg) throw AuditError("CatRealize", "missing parent geometry");
        std::vector<uint8_t> ok(words->size(), 0);
        parallel_for(words->size(), [&](size_t k) {
          const CatMap::Box& pbox = pg->boxes()[parent_of[k]];
          auto r = cat->constrain(pbox, ext[k].second, level - 1);
          if (!r) return;
          auto l = cat->constrain(*r, ext[k].first, -(level - 1));
          if (!l) return;
          boxes[k] = *l;
          ok[k] = 1;
        });
        for (size_t k = 0; k < ok.size(); ++k)
          if (!ok[k]) throw AuditError("CatRealize", "admissible word failed to realize");
      }
      return std::make_shared<CatGeometry>(cat, level, std::move(boxes), 0, 0, 1);
    }
  }
  throw AuditError("Realize", "unknown system kind");
}

}  // namespace

// ---------------------------------------------------------------------------
// refinement
// ---------------------------------------------------------------------------

std::vector<RefinedCover> refine_range(const SmaleSystem& sys, int n_max) {
  if (n_max < 1) throw config_error("depth must be >= 1");
  if (n_max > sys.depth_cap())
    throw depth_exceeded(sys.name() + " depth cap is " + std::to_string(sys.depth_cap()));
  const auto& M = sys.base_matrix();
  const auto& consts = sys.constants();

  std::vector<RefinedCover> out;
  out.reserve(n_max);

  RefinedCover base;
  base.level = 1;
  base.system = &sys;
  auto base_words = std::make_shared<WordList>();
  for (int s = 1; s <= M.size(); ++s) base_words->push_back({s});
  base.words = base_words;
  base.geom = realize_level(sys, 1, base.words, nullptr, {}, {});
  double bdiam = base.geom->diam_max();
  if (bdiam > std::max(consts.eps_dprime / 2, consts.coding_diam))
    throw base_too_coarse("base partition diameter " + std::to_string(bdiam) +
                          " fails the refinement hypothesis");
  out.push_back(std::move(base));

  for (int n = 2; n <= n_max; ++n) {
    const RefinedCover& prev = out.back();
    RefinedCover cur;
    cur.level = n;
    cur.system = &sys;
    auto words = std::make_shared<WordList>();
    std::vector<int> parent_of;
    std::vector<std::pair<int, int>> ext;
    for (size_t pi = 0; pi < prev.count(); ++pi) {
      const auto& w = prev.word(pi);
      for (int a = 1; a <= M.size(); ++a) {
        if (!M.allows(a, w.front())) continue;
        for (int b = 1; b <= M.size(); ++b) {
          if (!M.allows(w.back(), b)) continue;
          std::vector<int> child;
          child.reserve(w.size() + 2);
          child.push_back(a);
          child.insert(child.end(), w.begin(), w.end());
          child.push_back(b);
          words->push_back(std::move(child));
          parent_of.push_back(static_cast<int>(pi));
          ext.emplace_back(a, b);
        }
      }
    }
    cur.words = words;
    cur.geom = realize_level(sys, n, cur.words, prev.geom.get(), parent_of, ext);
    out.push_back(std::move(cur));
  }

  // cardinality identity #R_n = N_M(2n-1), checked on every build
  for (const auto& c : out) {
    auto expect = symdyn::count_words(M, 2 * c.level - 1);
    if (symdyn::BigInt(c.count()) != expect)
      throw AuditError("Refine", "level cardinality disagrees with the word count");
  }
  return out;
}

RefinedCover refine(const SmaleSystem& sys, int n) {
  auto all = refine_range(sys, n);
  return std::move(all.back());
}

// ---------------------------------------------------------------------------
// statistics
// ---------------------------------------------------------------------------

CoverStats cover_stats(const RefinedCover& cover, const SamplingSpec& spec) {
  CoverStats st;
  st.level = cover.level;
  st.count = cover.count();
  st.diam_max = cover.geom->diam_max();
  st.diam_min = cover.geom->diam_min();
  st.multiplicity = cover.geom->multiplicity();
  st.max_neighbours = cover.geom->max_neighbours();
  switch (cover.system->kind()) {
    case Kind::Sft:
      st.leb = std::ldexp(1.0, -(cover.level - 1));
      break;
    case Kind::CatMap:
    case Kind::Solenoid:
      st.leb = 0;  // closed covers overlap on their boundaries
      break;
    case Kind::Horseshoe: {
      Rng rng(spec.seed, 23);
      double leb = 1e99;
      for (int i = 0; i < 256; ++i) {
        int k = static_cast<int>(rng.below(static_cast<uint32_t>(cover.count())));
        Point x = cover.geom->sample_point(k, rng);
        double m = 0;
        for (int j : cover.geom->containing(x, 0)) m = std::max(m, cover.geom->dist_to_complement(x, j));
        leb = std::min(leb, m);
      }
      st.leb = leb;
      break;
    }
  }
  return st;
}

namespace {

// rectangles of `deep` touching rectangle k of `shallow` (same system)
std::vector<int> neighbourhood_of(const RefinedCover& deep, const RefinedCover& shallow, int k) {
  switch (deep.system->kind()) {
    case Kind::Sft:
      return static_cast<const SftGeometry*>(deep.geom.get())->touching_word(shallow.word(k));
    case Kind::Horseshoe:
      return static_cast<const HorseshoeGeometry*>(deep.geom.get())->touching_word(shallow.word(k));
    case Kind::CatMap: {
      const auto* dg = static_cast<const CatGeometry*>(deep.geom.get());
      const auto* sg = static_cast<const CatGeometry*>(shallow.geom.get());
      return dg->touching_box(sg->boxes()[k]);
    }
    case Kind::Solenoid: {
      const auto* dg = static_cast<const SolenoidGeometry*>(deep.geom.get());
      const auto* sg = static_cast<const SolenoidGeometry*>(shallow.geom.get());
      const auto& r = sg->rects()[k];
      std::vector<int> out;
      for (int j = 0; j < dg->count(); ++j) {
        const auto& rj = dg->rects()[j];
        bool hit = false;
        for (double theta : {rj.lo, rj.lo + rj.len}) {
          auto p = dg->make_point(theta, rj.c);
          const auto& sp = std::get<systems::SolenoidPoint>(p);
          if (dg->member(sp, rj, 0) && sg->member(sp, r, 0)) hit = true;
        }
        for (double theta : {r.lo, r.lo + r.len}) {
          auto p = sg->make_point(theta, r.c);
          const auto& sp = std::get<systems::SolenoidPoint>(p);
          if (sg->member(sp, r, 0) && dg->member(sp, rj, 0)) hit = true;
        }
        if (hit) out.push_back(j);
      }
      return out;
    }
  }
  return {};
}

}  // namespace

int normality_constant(const std::vector<RefinedCover>& covers) {
  if (covers.size() < 2) throw not_found("need at least two levels");
  const auto& base = covers[0];
  const int nb = static_cast<int>(base.count());

  for (int N = 1; N + 1 <= static_cast<int>(covers.size()); ++N) {
    const auto& deep = covers[N];  // level N+1
    bool ok = true;
    std::vector<std::vector<int>> nbhd(nb);
    for (int k = 0; k < nb; ++k) nbhd[k] = neighbourhood_of(deep, base, k);
    for (int a = 0; a < nb && ok; ++a)
      for (int b = a + 1; b < nb && ok; ++b) {
        if (base.geom->touches(a, b)) continue;  // only disjoint pairs constrain N
        std::vector<int> inter;
        std::set_intersection(nbhd[a].begin(), nbhd[a].end(), nbhd[b].begin(), nbhd[b].end(),
                              std::back_inserter(inter));
        if (!inter.empty()) ok = false;
      }
    if (!ok) continue;
    // propagation spot check one level up, when available
    if (covers.size() > static_cast<size_t>(N + 1)) {
      const auto& shallow2 = covers[1];
      const auto& deep2 = covers[N + 1];
      const int n2 = static_cast<int>(shallow2.count());
      Rng rng(7, 7);
      for (int trial = 0; trial < 200 && ok; ++trial) {
        int a = static_cast<int>(rng.below(static_cast<uint32_t>(n2)));
        int b = static_cast<int>(rng.below(static_cast<uint32_t>(n2)));
        if (a == b || shallow2.geom->touches(a, b)) continue;
        auto na = neighbourhood_of(deep2, shallow2, a);
        auto nbv = neighbourhood_of(deep2, shallow2, b);
        std::vector<int> inter;
        std::set_intersection(na.begin(), na.end(), nbv.begin(), nbv.end(), std::back_inserter(inter));
        if (!inter.empty()) ok = false;
      }
    }
    if (ok) return N;
  }
  throw not_found("no separating level within built depth (lower bound " +
                  std::to_string(covers.size() - 1) + ")");
}

NeighbourBoundReport neighbour_bound(const std::vector<RefinedCover>& covers, int N) {
  NeighbourBoundReport rep;
  rep.normality = N;
  int mn = 1;  // level 0, the whole space, has one neighbour
  for (const auto& c : covers) {
    int v = c.geom->max_neighbours();
    rep.sup_observed = std::max(rep.sup_observed, v);
    if (c.level <= N + 1) mn = std::max(mn, v);
  }
  symdyn::BigInt pow = 1;
  const symdyn::BigInt b = static_cast<long>(covers[0].count());
  for (int i = 0; i < 2 * (N + 1); ++i) pow *= b;
  rep.bound = pow > mn ? pow : symdyn::BigInt(mn);
  rep.ok = symdyn::BigInt(rep.sup_observed) <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// fattening
// ---------------------------------------------------------------------------

namespace {

// exact structural predicate behind the delta search for the cat map:
// pairwise-disjoint base rectangles stay disjoint after open fattening by e,
// and fattened stable/unstable neighbours avoid the central slices
bool cat_delta_ok(const CatGeometry& g, long long ea, long long eden, bool neighbour_separations) {
  const auto& boxes = g.base_boxes();
  const int n = static_cast<int>(boxes.size());
  for (int a = 0; a < n; ++a) {
    CatMap::Box Afat = CatMap::expanded(boxes[a], ea, 0, eden);
    for (int b = 0; b < n; ++b)
      for (int m = -2; m <= 2; ++m)
        for (int mm = -2; mm <= 2; ++mm) {
          if (a == b && m == 0 && mm == 0) continue;
          CatMap::Box T = CatMap::translated(boxes[b], m, mm);
          const auto& A = boxes[a];
          bool closed_touch = CatMap::box_overlap_closed(A, T);
          CatMap::Box Tfat = CatMap::expanded(T, ea, 0, eden);
          if (!closed_touch && CatMap::box_overlap_open(Afat, Tfat))
            return false;  // empty family became non-empty
          if (!neighbour_separations || !closed_touch) continue;
          // contact classification: distinct closed rectangles share boundary
          // only, so at least one coordinate overlap is degenerate
          long long den = std::lcm(A.den, T.den);
          auto As = CatMap::rescaled(A, den);
          auto Ts = CatMap::rescaled(T, den);
          auto k5min = [](const K5& u, const K5& v) {
            return K5::sign(u.a - v.a, u.b - v.b) <= 0 ? u : v;
          };
          auto k5max = [](const K5& u, const K5& v) {
            return K5::sign(u.a - v.a, u.b - v.b) >= 0 ? u : v;
          };
          K5 xi_hi = k5min(As.x1, Ts.x1), xi_lo = k5max(As.x0, Ts.x0);
          K5 eta_hi = k5min(As.y1, Ts.y1), eta_lo = k5max(As.y0, Ts.y0);
          bool xi_degenerate = K5::sign(xi_hi.a - xi_lo.a, xi_hi.b - xi_lo.b) == 0;
          bool eta_degenerate = K5::sign(eta_hi.a - eta_lo.a, eta_hi.b - eta_lo.b) == 0;
          // centre slices of A, at doubled denominator
          K5 xc{As.x0.a + As.x1.a, As.x0.b + As.x1.b};
          K5 yc{As.y0.a + As.y1.a, As.y0.b + As.y1.b};
          CatMap::Box Tfat2 = CatMap::rescaled(Tfat, std::lcm(Tfat.den, 2 * den));
          CatMap::Box As2 = CatMap::rescaled(As, 2 * den);
          if (xi_degenerate) {
            // stable neighbour: the fattened partner must miss the stable
            // slice X^s(x_A, A) = {xc} x [eta interval]
            bool hits = K5::cmp(Tfat2.x0, Tfat2.den, xc, 2 * den) < 0 &&
                        K5::cmp(xc, 2 * den, Tfat2.x1, Tfat2.den) < 0 &&
                        K5::cmp(As2.y0, As2.den, Tfat2.y1, Tfat2.den) < 0 &&
                        K5::cmp(Tfat2.y0, Tfat2.den, As2.y1, As2.den) < 0;
            if (hits) return false;
          }
          if (eta_degenerate) {
            // unstable neighbour: mirror condition with X^u(x_A, A)
            bool hits = K5::cmp(Tfat2.y0, Tfat2.den, yc, 2 * den) < 0 &&
                        K5::cmp(yc, 2 * den, Tfat2.y1, Tfat2.den) < 0 &&
                        K5::cmp(As2.x0, As2.den, Tfat2.x1, Tfat2.den) < 0 &&
                        K5::cmp(Tfat2.x0, Tfat2.den, As2.x1, As2.den) < 0;
            if (hits) return false;
          }
        }
  }
  return true;
}

// conservative exact predicate: formerly disjoint pairs must keep disjoint
// expanded angle intervals, and the fattened neighbours must miss the stable
// fibre through an interior base point (taken off the dyadic grid)
bool solenoid_delta_ok(const SolenoidGeometry& g, double t, bool neighbour_separations) {
  const auto& rects = g.rects();
  const int n = static_cast<int>(rects.size());
  const double len = rects[0].len;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      bool closed_touch = g.touches(a, b);
      double gap = 1e99;
      for (double shift : {-1.0, 0.0, 1.0}) {
        double lo = rects[b].lo + shift, hi = rects[b].lo + rects[b].len + shift;
        gap = std::min(gap, std::max({lo - (rects[a].lo + rects[a].len), rects[a].lo - hi, 0.0}));
      }
      if (!closed_touch && gap > 0 && 2 * t >= gap) return false;
      if (neighbour_separations && closed_touch) {
        double theta_r = rects[a].lo + len / 3.0;  // interior, off the dyadic grid
        for (double shift : {-1.0, 0.0, 1.0}) {
          double lo = rects[b].lo + shift - t, hi = rects[b].lo + rects[b].len + shift + t;
          bool same_interval = std::abs(rects[b].lo + shift - rects[a].lo) < 0.25 * len;
          if (!same_interval && theta_r > lo && theta_r < hi) return false;
        }
      }
    }
  return true;
}

}  // namespace

DeltaBounds delta_search(const SmaleSystem& sys, const RefinedCover& base) {
  const auto& consts = sys.constants();
  DeltaBounds out;
  switch (sys.kind()) {
    case Kind::Sft:
    case Kind::Horseshoe:
      // empty boundaries: no geometric constraint binds
      out.delta0 = out.delta1 = consts.eps_dprime / 4;
      return out;
    case Kind::CatMap: {
      const auto* g = static_cast<const CatGeometry*>(base.geom.get());
      const double L = CatMap::eig_scale();
      // bisect the eigen-unit expansion on a dyadic grid; predicates exact
      auto ok = [&](double e_d, bool nbr) {
        auto num = static_cast<long long>(std::floor(std::ldexp(e_d, 40)));
        if (num <= 0) return true;
        return cat_delta_ok(*g, num, 1LL << 40, nbr);
      };
      auto bisect = [&](bool nbr) {
        double hi = consts.eps_dprime / (4 * L);
        if (ok(hi, nbr)) return hi * L;
        double lo = 0;
        for (int it = 0; it < 40 && (hi - lo) > 1e-3 * hi; ++it) {
          double mid = 0.5 * (lo + hi);
          (ok(mid, nbr) ? lo : hi) = mid;
        }
        return lo * L;
      };
      out.delta0 = bisect(false);
      out.delta1 = std::min(out.delta0, bisect(true));
      return out;
    }
    case Kind::Solenoid: {
      const auto* g = static_cast<const SolenoidGeometry*>(base.geom.get());
      const double norm = g->theta_norm();
      auto ok = [&](double delta, bool nbr) { return solenoid_delta_ok(*g, delta / norm, nbr); };
      auto bisect = [&](bool nbr) {
        double hi = consts.eps_dprime / 4;
        if (ok(hi, nbr)) return hi;
        double lo = 0;
        for (int it = 0; it < 40 && (hi - lo) > 1e-3 * hi; ++it) {
          double mid = 0.5 * (lo + hi);
          (ok(mid, nbr) ? lo : hi) = mid;
        }
        return lo;
      };
      out.delta0 = bisect(false);
      out.delta1 = std::min(out.delta0, bisect(true));
      return out;
    }
  }
  return out;
}

FatCover fatten(const RefinedCover& cover, double delta) {
  if (!(delta > 0)) throw delta_too_large("fattening must be open (delta > 0)");
  const auto& consts = cover.system->constants();
  FatCover fat;
  fat.level = cover.level;
  fat.system = cover.system;
  fat.count = cover.count();
  switch (cover.system->kind()) {
    case Kind::Sft:
    case Kind::Horseshoe: {
      if (delta > consts.eps_dprime / 4 + 1e-15)
        throw delta_too_large("delta exceeds the trivial-fattening range");
      fat.delta = delta;
      fat.geom = cover.geom;  // stable and unstable boundaries are empty
      return fat;
    }
    case Kind::CatMap: {
      const auto* g = static_cast<const CatGeometry*>(cover.geom.get());
      const auto* cat = g->system();
      const double L = CatMap::eig_scale();
      // snap to a dyadic eigen-unit expansion so the fat boxes stay exact
      double e_d = delta / L;
      const long long eden = 1LL << 40;
      auto num = static_cast<long long>(std::floor(std::ldexp(e_d, 40)));
      if (num <= 0) throw delta_too_large("delta underflows the dyadic grid");
      // the level-scaled expansion must stay below half the smallest box side
      long long sa = num, sb = 0, sden = eden;
      CatMap::scale_by_phi_power(sa, sb, sden, -(cover.level - 1));
      for (const auto& b : g->base_boxes()) {
        K5 w{b.x1.a - b.x0.a, b.x1.b - b.x0.b};
        K5 h{b.y1.a - b.y0.a, b.y1.b - b.y0.b};
        K5 e2{2 * sa, 2 * sb};
        if (K5::cmp(e2, sden, w, b.den) >= 0 || K5::cmp(e2, sden, h, b.den) >= 0)
          throw delta_too_large("delta exceeds half the smallest rectangle side");
      }
      fat.delta = static_cast<double>(num) / static_cast<double>(eden) * L;
      fat.geom = std::make_shared<CatGeometry>(cat, cover.level,
                                               std::vector<CatMap::Box>(g->base_boxes()), num, 0, eden);
      return fat;
    }
    case Kind::Solenoid: {
      const auto* g = static_cast<const SolenoidGeometry*>(cover.geom.get());
      const auto* sol = static_cast<const Solenoid*>(cover.system);
      double t = delta / g->theta_norm();
      // the binding angle constraint comes from the deepest digit of the
      // window, so the base fattening scales by 2^{-(n-1)}
      double t_level = t * std::ldexp(1.0, -(cover.level - 1));
      if (t_level >= 0.5 * g->rects()[0].len)
        throw delta_too_large("delta exceeds half the angle interval");
      fat.delta = delta;
      fat.geom = std::make_shared<SolenoidGeometry>(
          sol, cover.level, std::vector<SolenoidGeometry::Rect>(g->rects()), t_level);
      return fat;
    }
  }
  throw AuditError("Fatten", "unknown system kind");
}

AuditReport fattening_audit(const std::vector<RefinedCover>& covers, const std::vector<FatCover>& fats) {
  AuditReport rep;
  if (covers.size() != fats.size()) throw config_error("audit needs matching level lists");
  for (size_t lv = 0; lv < covers.size(); ++lv) {
    const auto& cov = covers[lv];
    const auto& fat = fats[lv];
    const std::string tag = "level " + std::to_string(cov.level) + ": ";
    if (cov.count() != fat.count) {
      rep.violations.push_back(tag + "cardinality changed under fattening");
      continue;
    }
    if (cov.geom.get() == fat.geom.get()) continue;  // trivial fattening
    if (cov.geom->multiplicity() != fat.geom->multiplicity())
      rep.violations.push_back(tag + "multiplicity changed under fattening");
    // per-rectangle neighbour counts agree
    const int n = cov.geom->count();
    std::vector<uint8_t> neigh_ok(n, 1);
    parallel_for(n, [&](size_t k) {
      auto a = cov.geom->neighbors(static_cast<int>(k));
      auto b = fat.geom->neighbors(static_cast<int>(k));
      if (a != b) neigh_ok[k] = 0;
    });
    for (int k = 0; k < n; ++k)
      if (!neigh_ok[k]) {
        rep.violations.push_back(tag + "neighbour set changed for rectangle " + std::to_string(k));
        break;
      }
    if (cov.system->kind() == Kind::CatMap) {
      const auto* g = static_cast<const CatGeometry*>(cov.geom.get());
      const auto* fg = static_cast<const CatGeometry*>(fat.geom.get());
      // (a) no rectangle is swallowed by another's fattening
      std::vector<uint8_t> swallowed(n, 0);
      parallel_for(n, [&](size_t a) {
        for (int b : fg->neighbors(static_cast<int>(a)))
          if (static_cast<int>(a) != b && g->base_swallowed_by(static_cast<int>(a), *fg, b)) swallowed[a] = 1;
      });
      for (int a = 0; a < n; ++a)
        if (swallowed[a]) {
          rep.violations.push_back(tag + "rectangle " + std::to_string(a) +
                                   " contained in a fattened partner");
          break;
        }
      // (b) intersecting fat families come from intersecting bases: witness
      // census at the corners of the base rectangles
      bool family_bad = false;
      for (int a = 0; a < n && !family_bad; ++a) {
        const auto& b = g->base_boxes()[a];
        for (const K5& cx : {b.x0, b.x1})
          for (const K5& cy : {b.y0, b.y1}) {
            int fat_cnt = fg->count_containing_exact(cx, cy, b.den);
            int base_cnt = g->count_containing_exact(cx, cy, b.den);
            // the corner witnesses a fat intersection family; the same corner
            // must witness the base family
            if (fat_cnt > 0 && base_cnt < fat_cnt) family_bad = true;
          }
      }
      if (family_bad) rep.violations.push_back(tag + "fat intersection family lost its base point");
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

UfcpReport ufcp(const SmaleSystem& sys, const std::vector<RefinedCover>& covers,
                const std::vector<double>& radii, const std::vector<Point>& centers) {
  UfcpReport rep;
  std::vector<double> diam;
  diam.reserve(covers.size());
  for (const auto& c : covers) diam.push_back(c.geom->diam_max());
  for (double r : radii) {
    if (!(r > 0) || r >= sys.constants().diameter)
      throw config_error("ufcp radius outside (0, diam X)");
    int level = -1;
    for (size_t i = 0; i < covers.size(); ++i)
      if (diam[i] <= r) {
        level = covers[i].level;
        break;
      }
    for (size_t ci = 0; ci < centers.size(); ++ci) {
      UfcpRow row;
      row.center = static_cast<int>(ci);
      row.r = r;
      if (level < 0) {
        row.depth_exceeded = true;  // reported, never fabricated
        rep.table.push_back(row);
        continue;
      }
      row.level = level;
      row.count = static_cast<int>(covers[level - 1].geom->meeting_ball(centers[ci], r).size());
      rep.sup_count = std::max(rep.sup_count, row.count);
      rep.table.push_back(row);
    }
  }
  return rep;
}

double lebesgue(const FatCover& fat, int samples, uint64_t seed) {
  const auto& sys = *fat.system;
  double leb = std::numeric_limits<double>::infinity();
  if (sys.kind() == Kind::CatMap) {
    const auto* cat = static_cast<const CatMap*>(&sys);
    R2Sequence seq;
    for (int i = 0; i < samples; ++i) {
      double x, y;
      seq.next(x, y);
      Point p = systems::TorusPoint{x, y};
      double best = 0;
      for (int k : fat.geom->containing(p, 0)) best = std::max(best, fat.geom->dist_to_complement(p, k));
      leb = std::min(leb, best);
    }
    (void)cat;
    return leb;
  }
  Rng rng(seed, 29);
  for (int i = 0; i < samples; ++i) {
    Point p = sys.random_point(rng);
    double best = 0;
    for (int k : fat.geom->containing(p, 0)) best = std::max(best, fat.geom->dist_to_complement(p, k));
    leb = std::min(leb, best);
  }
  return leb;
}

}  // namespace smalelab::partitions
