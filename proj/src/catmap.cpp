#include <algorithm>
#include <cmath>
#include <numeric>

#include "smalelab/errors.hpp"
#include "smalelab/systems.hpp"

namespace smalelab::systems {

namespace {

using I128 = __int128;

constexpr double SQRT5 = 2.23606797749978969640;

// lattice vectors of Z^2 in eigen-parameters, numerators over denominator 10:
// e1 = (c, q), e2 = (q, -c) with c = 1/sqrt5 = (0 + 2*sqrt5)/10 and
// q = c/phi = (5 - sqrt5)/10
constexpr long long E1X_A = 0, E1X_B = 2;
constexpr long long E1Y_A = 5, E1Y_B = -1;
constexpr long long E2X_A = 5, E2X_B = -1;
constexpr long long E2Y_A = 0, E2Y_B = -2;
constexpr long long LAT_DEN = 10;

double approx(long long a, long long b, long long den) {
  return (static_cast<double>(a) + static_cast<double>(b) * SQRT5) / static_cast<double>(den);
}

// Lucas and Fibonacci numbers: phi^(2p) = (L_{2p} + F_{2p} sqrt5)/2
void phi_power(int p, long long& la, long long& lb) {
  int e = 2 * std::abs(p);
  long long lu = 2, fi = 0;  // L_0, F_0
  long long lu1 = 1, fi1 = 1;
  for (int i = 0; i < e; ++i) {
    long long lu2 = lu + lu1, fi2 = fi + fi1;
    lu = lu1;
    fi = fi1;
    lu1 = lu2;
    fi1 = fi2;
  }
  la = lu;
  lb = (p >= 0) ? fi : -fi;
}

}  // namespace

int K5::sign(long long a, long long b) {
  if (b == 0) return a > 0 ? 1 : (a < 0 ? -1 : 0);
  if (a == 0) return b > 0 ? 1 : -1;
  if (a > 0 && b > 0) return 1;
  if (a < 0 && b < 0) return -1;
  I128 lhs = static_cast<I128>(a) * a;
  I128 rhs = static_cast<I128>(5) * b * b;
  if (lhs == rhs) return 0;
  return (lhs > rhs) ? (a > 0 ? 1 : -1) : (b > 0 ? 1 : -1);
}

void CatMap::Box::refresh() {
  xlo = approx(x0.a, x0.b, den);
  xhi = approx(x1.a, x1.b, den);
  ylo = approx(y0.a, y0.b, den);
  yhi = approx(y1.a, y1.b, den);
}

CatMap::Box CatMap::rescaled(const Box& b, long long new_den) {
  if (new_den == b.den) return b;
  if (new_den % b.den != 0) throw AuditError("CatExact", "incompatible denominators");
  long long f = new_den / b.den;
  Box out = b;
  out.den = new_den;
  for (K5* k : {&out.x0, &out.x1, &out.y0, &out.y1}) {
    k->a *= f;
    k->b *= f;
  }
  return out;
}

CatMap::Box CatMap::map_box(const Box& b, int power) {
  if (power == 0) return b;
  long long la, lb;
  phi_power(power, la, lb);
  // multiply x by phi^{2 power} = (la + lb sqrt5)/2, y by its conjugate-power
  Box out;
  out.den = b.den * 2;
  auto mul = [&](const K5& k, long long ma, long long mb) {
    return K5{k.a * ma + 5 * k.b * mb, k.a * mb + k.b * ma};
  };
  out.x0 = mul(b.x0, la, lb);
  out.x1 = mul(b.x1, la, lb);
  out.y0 = mul(b.y0, la, -lb);
  out.y1 = mul(b.y1, la, -lb);
  out.refresh();
  return out;
}

CatMap::Box CatMap::translated(const Box& b, int m, int n) {
  long long f = b.den / LAT_DEN;
  if (b.den % LAT_DEN != 0) throw AuditError("CatExact", "denominator not divisible by 10");
  Box out = b;
  K5 vx{(m * E1X_A + n * E2X_A) * f, (m * E1X_B + n * E2X_B) * f};
  K5 vy{(m * E1Y_A + n * E2Y_A) * f, (m * E1Y_B + n * E2Y_B) * f};
  out.x0.a += vx.a;
  out.x0.b += vx.b;
  out.x1.a += vx.a;
  out.x1.b += vx.b;
  out.y0.a += vy.a;
  out.y0.b += vy.b;
  out.y1.a += vy.a;
  out.y1.b += vy.b;
  out.refresh();
  return out;
}

CatMap::Box CatMap::expanded(const Box& b, long long ea, long long eb, long long eden) {
  long long den = std::lcm(b.den, eden);
  Box out = rescaled(b, den);
  long long f = den / eden;
  K5 e{ea * f, eb * f};
  out.x0.a -= e.a;
  out.x0.b -= e.b;
  out.y0.a -= e.a;
  out.y0.b -= e.b;
  out.x1.a += e.a;
  out.x1.b += e.b;
  out.y1.a += e.a;
  out.y1.b += e.b;
  out.refresh();
  return out;
}

void CatMap::scale_by_phi_power(long long& ea, long long& eb, long long& eden, int power) {
  if (power == 0) return;
  long long la, lb;
  phi_power(power, la, lb);
  long long na = ea * la + 5 * eb * lb;
  long long nb = ea * lb + eb * la;
  ea = na;
  eb = nb;
  eden *= 2;
  long long g = std::gcd(std::gcd(std::abs(ea), std::abs(eb)), eden);
  if (g > 1) {
    ea /= g;
    eb /= g;
    eden /= g;
  }
}

int K5::cmp(const K5& x, long long dx, const K5& y, long long dy) {
  if (dx == dy) return K5::sign(x.a - y.a, x.b - y.b);
  long long den = std::lcm(dx, dy);
  long long fx = den / dx, fy = den / dy;
  return K5::sign(x.a * fx - y.a * fy, x.b * fx - y.b * fy);
}

namespace {

int cmp_coord(const K5& x, long long dx, const K5& y, long long dy) { return K5::cmp(x, dx, y, dy); }

}  // namespace

bool CatMap::box_overlap_open(const Box& a, const Box& b) {
  return cmp_coord(a.x0, a.den, b.x1, b.den) < 0 && cmp_coord(b.x0, b.den, a.x1, a.den) < 0 &&
         cmp_coord(a.y0, a.den, b.y1, b.den) < 0 && cmp_coord(b.y0, b.den, a.y1, a.den) < 0;
}

bool CatMap::box_overlap_closed(const Box& a, const Box& b) {
  return cmp_coord(a.x0, a.den, b.x1, b.den) <= 0 && cmp_coord(b.x0, b.den, a.x1, a.den) <= 0 &&
         cmp_coord(a.y0, a.den, b.y1, b.den) <= 0 && cmp_coord(b.y0, b.den, a.y1, a.den) <= 0;
}

bool CatMap::box_subset_strict(const Box& inner, const Box& outer) {
  return cmp_coord(outer.x0, outer.den, inner.x0, inner.den) < 0 &&
         cmp_coord(inner.x1, inner.den, outer.x1, outer.den) < 0 &&
         cmp_coord(outer.y0, outer.den, inner.y0, inner.den) < 0 &&
         cmp_coord(inner.y1, inner.den, outer.y1, outer.den) < 0;
}

bool CatMap::box_contains_closed(const Box& b, K5 px, K5 py, long long pden) {
  return cmp_coord(b.x0, b.den, px, pden) <= 0 && cmp_coord(px, pden, b.x1, b.den) <= 0 &&
         cmp_coord(b.y0, b.den, py, pden) <= 0 && cmp_coord(py, pden, b.y1, b.den) <= 0;
}

bool CatMap::box_contains_open(const Box& b, K5 px, K5 py, long long pden) {
  return cmp_coord(b.x0, b.den, px, pden) < 0 && cmp_coord(px, pden, b.x1, b.den) < 0 &&
         cmp_coord(b.y0, b.den, py, pden) < 0 && cmp_coord(py, pden, b.y1, b.den) < 0;
}

double CatMap::eig_scale() { return std::sqrt(eig_scale_sq().approx()); }
Q5 CatMap::eig_scale_sq() { return Q5::golden_sq() + Q5(1); }  // phi^2 + 1

Q5 CatMap::box_area(const Box& b) {
  Rational den(b.den);
  Q5 w{Rational(b.x1.a - b.x0.a) / den, Rational(b.x1.b - b.x0.b) / den};
  Q5 h{Rational(b.y1.a - b.y0.a) / den, Rational(b.y1.b - b.y0.b) / den};
  return w * h * eig_scale_sq();
}

CatMap::CatMap(int prerefine) {
  if (prerefine < 0 || prerefine > 2) throw config_error("catmap prerefine must be in 0..2");
  build_partition(prerefine);

  consts_.eps = 0.25;
  consts_.eps_prime = 0.125;
  consts_.eps_dprime = 1.0 / 128.0;
  double l = Q5::golden_sq().approx();
  consts_.lambda = l;
  consts_.lip_fwd = consts_.lip_inv = l;
  consts_.ell = consts_.Lambda = l;
  consts_.diameter = std::sqrt(0.5);
  consts_.coding_diam = base_diam() * (1 + 1e-12);
  for (const auto& b : boxes_) sample_weights_.push_back((b.xhi - b.xlo) * (b.yhi - b.ylo));
}

namespace {

bool overlaps_open(const CatMap::Box& a, const CatMap::Box& t) {
  // assumes equal denominators
  return K5::sign(a.x0.a - t.x1.a, a.x0.b - t.x1.b) < 0 &&
         K5::sign(t.x0.a - a.x1.a, t.x0.b - a.x1.b) < 0 &&
         K5::sign(a.y0.a - t.y1.a, a.y0.b - t.y1.b) < 0 &&
         K5::sign(t.y0.a - a.y1.a, t.y0.b - a.y1.b) < 0;
}

CatMap::Box intersect(const CatMap::Box& a, const CatMap::Box& t) {
  CatMap::Box out = a;
  auto take_max = [](K5& x, const K5& y) {
    if (K5::sign(y.a - x.a, y.b - x.b) > 0) x = y;
  };
  auto take_min = [](K5& x, const K5& y) {
    if (K5::sign(y.a - x.a, y.b - x.b) < 0) x = y;
  };
  take_max(out.x0, t.x0);
  take_min(out.x1, t.x1);
  take_max(out.y0, t.y0);
  take_min(out.y1, t.y1);
  out.refresh();
  return out;
}

}  // namespace

void CatMap::build_partition(int prerefine) {
  // the two golden squares over denominator 10: big [0,c]^2, small
  // [c, c*phi] x [0, q] with c = 2sqrt5/10, c*phi = (5+sqrt5)/10, q = (5-sqrt5)/10
  Box big, small;
  big.den = small.den = 10;
  big.x0 = {0, 0};
  big.x1 = {0, 2};
  big.y0 = {0, 0};
  big.y1 = {0, 2};
  small.x0 = {0, 2};
  small.x1 = {5, 1};
  small.y0 = {0, 0};
  small.y1 = {5, -1};
  big.refresh();
  small.refresh();
  std::vector<Box> tiles{big, small};

  struct Slab {
    Box box;
    int i, j;
  };
  std::vector<Slab> slabs;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int m = -3; m <= 3; ++m)
        for (int n = -3; n <= 3; ++n) {
          Box pre = map_box(translated(tiles[j], m, n), -1);  // den 20
          Box tile = rescaled(tiles[i], pre.den);
          if (overlaps_open(tile, pre)) slabs.push_back({intersect(tile, pre), i, j});
        }
  if (slabs.size() != 5) throw AuditError("CatPartition", "expected 5 slabs");
  std::sort(slabs.begin(), slabs.end(), [](const Slab& a, const Slab& b) {
    if (a.i != b.i) return a.i < b.i;
    return K5::sign(a.box.x0.a - b.box.x0.a, a.box.x0.b - b.box.x0.b) < 0;
  });

  // exact area check: slab areas sum to the torus area 1
  Q5 total(0);
  for (auto& s : slabs) total += box_area(s.box);
  if (!(total == Q5(1))) throw AuditError("CatPartition", "areas do not sum to 1");

  // disjoint interiors across nearby translates
  for (size_t a = 0; a < slabs.size(); ++a)
    for (size_t b = 0; b < slabs.size(); ++b)
      for (int m = -2; m <= 2; ++m)
        for (int n = -2; n <= 2; ++n) {
          if (a == b && m == 0 && n == 0) continue;
          if (overlaps_open(slabs[a].box, translated(slabs[b].box, m, n)))
            throw AuditError("CatPartition", "slab interiors overlap");
        }

  // transition matrix with the exact Markov verification: the image of a slab
  // must cross the target tile fully along the unstable axis and sit inside
  // the target slab along the stable axis
  std::vector<uint8_t> ent(25, 0);
  for (size_t a = 0; a < slabs.size(); ++a) {
    Box img = map_box(slabs[a].box, 1);  // den 40
    for (size_t b = 0; b < slabs.size(); ++b) {
      for (int m = -4; m <= 4; ++m)
        for (int n = -4; n <= 4; ++n) {
          Box t = rescaled(translated(slabs[b].box, m, n), img.den);
          if (!overlaps_open(img, t)) continue;
          Box tile = rescaled(translated(tiles[slabs[b].i], m, n), img.den);
          bool crosses = K5::sign(img.x0.a - tile.x0.a, img.x0.b - tile.x0.b) <= 0 &&
                         K5::sign(tile.x1.a - img.x1.a, tile.x1.b - img.x1.b) <= 0;
          bool inside = K5::sign(t.y0.a - img.y0.a, t.y0.b - img.y0.b) <= 0 &&
                        K5::sign(img.y1.a - t.y1.a, img.y1.b - t.y1.b) <= 0;
          if (!crosses || !inside)
            throw AuditError("CatPartition", "Markov conditions fail for slab pair");
          if (ent[a * 5 + b]) throw AuditError("CatPartition", "double crossing in slab matrix");
          ent[a * 5 + b] = 1;
        }
      if (ent[a * 5 + b] != (slabs[a].j == slabs[b].i ? 1 : 0))
        throw AuditError("CatPartition", "slab transitions disagree with tile composition");
    }
  }

  boxes_.clear();
  for (auto& s : slabs) boxes_.push_back(s.box);
  matrix_ = std::make_unique<symdyn::TransitionMatrix>(5, ent);

  for (int round = 0; round < prerefine; ++round) {
    const auto& m = *matrix_;
    std::vector<std::vector<int>> words;
    std::vector<Box> wboxes;
    for (int a = 1; a <= m.size(); ++a)
      for (int b = 1; b <= m.size(); ++b) {
        if (!m.allows(a, b)) continue;
        for (int d = 1; d <= m.size(); ++d) {
          if (!m.allows(b, d)) continue;
          auto r = constrain(boxes_[b - 1], d, 1);
          if (!r) continue;
          auto l = constrain(*r, a, -1);
          if (!l) continue;
          words.push_back({a, b, d});
          wboxes.push_back(*l);
        }
      }
    const int nn = static_cast<int>(words.size());
    std::vector<uint8_t> e2(static_cast<size_t>(nn) * nn, 0);
    for (int x = 0; x < nn; ++x)
      for (int y = 0; y < nn; ++y)
        if (words[x][1] == words[y][0] && words[x][2] == words[y][1]) e2[x * nn + y] = 1;
    boxes_ = std::move(wboxes);
    matrix_ = std::make_unique<symdyn::TransitionMatrix>(nn, std::move(e2));
  }

  parry_ = symdyn::parry(*matrix_);
}

double CatMap::base_diam() const {
  double e1x = approx(E1X_A, E1X_B, LAT_DEN), e1y = approx(E1Y_A, E1Y_B, LAT_DEN);
  double e2x = approx(E2X_A, E2X_B, LAT_DEN), e2y = approx(E2Y_A, E2Y_B, LAT_DEN);
  double best = 0;
  for (const auto& b : boxes_) {
    double w = b.xhi - b.xlo, h = b.yhi - b.ylo;
    double lift = eig_scale() * std::hypot(w, h);
    double corners[4][2] = {{b.xlo, b.ylo}, {b.xlo, b.yhi}, {b.xhi, b.ylo}, {b.xhi, b.yhi}};
    double reduced = 0;
    for (auto& p : corners)
      for (auto& r : corners) {
        double dx = p[0] - r[0], dy = p[1] - r[1];
        double bestpair = 1e99;
        for (int m = -1; m <= 1; ++m)
          for (int n = -1; n <= 1; ++n) {
            double ux = dx + m * e1x + n * e2x, uy = dy + m * e1y + n * e2y;
            bestpair = std::min(bestpair, std::hypot(ux, uy));
          }
        reduced = std::max(reduced, bestpair);
      }
    best = std::max(best, std::min(lift, eig_scale() * reduced));
  }
  return best;
}

std::optional<CatMap::Box> CatMap::constrain(const Box& running, int symbol, int i) const {
  const Box& base = boxes_.at(symbol - 1);
  Box img = map_box(running, i);
  // predict the lattice translate from the double mirrors; |e1|^2 = |e2|^2 = q
  const double qd = 0.27639320225002106;
  const double e1x = approx(E1X_A, E1X_B, LAT_DEN), e1y = approx(E1Y_A, E1Y_B, LAT_DEN);
  const double e2x = approx(E2X_A, E2X_B, LAT_DEN), e2y = approx(E2Y_A, E2Y_B, LAT_DEN);
  double dx = 0.5 * (img.xlo + img.xhi) - 0.5 * (base.xlo + base.xhi);
  double dy = 0.5 * (img.ylo + img.yhi) - 0.5 * (base.ylo + base.yhi);
  int m0 = static_cast<int>(std::lround((dx * e1x + dy * e1y) / qd));
  int n0 = static_cast<int>(std::lround((dx * e2x + dy * e2y) / qd));
  std::optional<Box> hit;
  long long den = std::lcm(img.den, base.den);
  Box img_s = rescaled(img, den);
  for (int m = m0 - 2; m <= m0 + 2; ++m)
    for (int n = n0 - 2; n <= n0 + 2; ++n) {
      Box t = rescaled(translated(base, m, n), den);
      if (overlaps_open(img_s, t)) {
        if (hit) throw AuditError("CatRealize", "ambiguous lattice translate");
        hit = t;
      }
    }
  if (!hit) return std::nullopt;
  Box pre = map_box(*hit, -i);
  long long d2 = std::lcm(running.den, pre.den);
  Box out = intersect(rescaled(running, d2), rescaled(pre, d2));
  if (K5::sign(out.x1.a - out.x0.a, out.x1.b - out.x0.b) <= 0 ||
      K5::sign(out.y1.a - out.y0.a, out.y1.b - out.y0.b) <= 0)
    throw AuditError("CatRealize", "constraint produced an empty box");
  // reduce, keeping the denominator divisible by the lattice one
  long long g = out.den / LAT_DEN;
  for (const K5* k : {&out.x0, &out.x1, &out.y0, &out.y1})
    g = std::gcd(g, std::gcd(std::abs(k->a), std::abs(k->b)));
  if (g > 1) {
    out.den /= g;
    for (K5* k : {&out.x0, &out.x1, &out.y0, &out.y1}) {
      k->a /= g;
      k->b /= g;
    }
  }
  return out;
}

TorusPoint CatMap::eig_to_torus(double xi, double eta) const {
  double phi = Q5::golden().approx();
  double x = xi * phi + eta;
  double y = xi - eta * phi;
  x -= std::floor(x);
  y -= std::floor(y);
  return {x, y};
}

void CatMap::torus_to_eig(const TorusPoint& p, double& xi, double& eta) const {
  double phi = Q5::golden().approx();
  double qd = 1.0 / (phi * phi + 1.0);
  xi = qd * (phi * p.x + p.y);
  eta = qd * (p.x - phi * p.y);
}

namespace {

double wrap_half(double t) {
  t = t - std::floor(t);
  if (t >= 0.5) t -= 1.0;
  return t;
}

}  // namespace

double CatMap::dist(const Point& a, const Point& b) const {
  const auto& p = std::get<TorusPoint>(a);
  const auto& r = std::get<TorusPoint>(b);
  return std::hypot(wrap_half(p.x - r.x), wrap_half(p.y - r.y));
}

Point CatMap::apply(const Point& p) const {
  const auto& t = std::get<TorusPoint>(p);
  double x = 2 * t.x + t.y, y = t.x + t.y;
  return TorusPoint{x - std::floor(x), y - std::floor(y)};
}

Point CatMap::apply_inv(const Point& p) const {
  const auto& t = std::get<TorusPoint>(p);
  double x = t.x - t.y, y = -t.x + 2 * t.y;
  return TorusPoint{x - std::floor(x), y - std::floor(y)};
}

Point CatMap::bracket(const Point& a, const Point& b) const {
  if (dist(a, b) > consts_.eps + 1e-15) throw too_far("bracket undefined beyond eps");
  const auto& x = std::get<TorusPoint>(a);
  const auto& y = std::get<TorusPoint>(b);
  double dx = wrap_half(y.x - x.x);
  double dy = wrap_half(y.y - x.y);
  double phi = Q5::golden().approx();
  double qd = 1.0 / (phi * phi + 1.0);
  double deta = qd * (dx - phi * dy);  // stable component of the displacement
  double zx = x.x + deta, zy = x.y - deta * phi;
  return TorusPoint{zx - std::floor(zx), zy - std::floor(zy)};
}

Point CatMap::random_point(Rng& rng) const {
  // Parry sampling through the coding: pick a base box with its Parry weight
  // (equal to its area by the measure isomorphism), then uniform inside it.
  // The boxes tile the torus, so this is the Bowen (= Lebesgue) measure.
  int k = rng.pick_weighted(sample_weights_.data(), static_cast<int>(sample_weights_.size()));
  const auto& b = base_boxes()[k];
  double xi = rng.uniform(b.xlo, b.xhi);
  double eta = rng.uniform(b.ylo, b.yhi);
  return eig_to_torus(xi, eta);
}

}  // namespace smalelab::systems
