#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smalelab/partitions.hpp"

using namespace smalelab;
using namespace smalelab::partitions;
using systems::make_system;
using systems::Point;

namespace {
const double kLam = (3.0 + std::sqrt(5.0)) / 2.0;
}

TEST_CASE("refinement counts follow the word-count identity") {
  auto golden = make_system("golden");
  auto covers = refine_range(*golden, 3);
  CHECK(covers[0].count() == 2);  // n = 1 is the base partition
  CHECK(covers[1].count() == 5);  // N_M(3)
  CHECK(covers[2].count() == 13);

  auto cat = make_system("catmap");
  auto cc = refine_range(*cat, 3);
  CHECK(cc[2].count() == symdyn::count_words(cat->base_matrix(), 5).convert_to<size_t>());
  CHECK(cc[2].count() == 233);

  CHECK_THROWS_AS(refine_range(*cat, 9), PreconditionError);  // depth cap
}

TEST_CASE("full shift cover statistics are closed form") {
  auto sys = make_system("full2");
  auto covers = refine_range(*sys, 6);
  for (const auto& c : covers) {
    auto st = cover_stats(c, {2000, 1});
    CHECK(st.diam_max == doctest::Approx(std::ldexp(1.0, -c.level)));
    CHECK(st.diam_min == st.diam_max);
    CHECK(st.multiplicity == 1);
    CHECK(st.max_neighbours == 1);
    CHECK(st.leb == doctest::Approx(std::ldexp(1.0, -(c.level - 1))));
    CHECK(st.count == (size_t{1} << (2 * c.level - 1)));
  }
}

TEST_CASE("cat map diameters decay at the squared golden rate") {
  auto sys = make_system("catmap");
  auto covers = refine_range(*sys, 6);
  std::vector<double> dm;
  for (const auto& c : covers) dm.push_back(c.geom->diam_max());
  for (int n = 3; n <= 5; ++n) {
    double ratio = dm[n] / dm[n - 1];
    CHECK(ratio == doctest::Approx(1.0 / kLam).epsilon(0.10));
  }
  // multiplicity bound m <= (#R1)^2 and the exact observed value
  for (const auto& c : covers) {
    int mult = c.geom->multiplicity();
    CHECK(mult <= 25);
    CHECK(mult == 4);
  }
  // stable-slice lower bound on the smallest diameter
  double dstab = 1e99;
  {
    const auto& base = covers[0];
    for (size_t k = 0; k < base.count(); ++k) dstab = std::min(dstab, base.geom->diam(k));
  }
  for (const auto& c : covers) {
    double bound = std::pow(kLam, -(c.level - 1)) * 0.5;  // measured stable height ~ 0.526
    CHECK(c.geom->diam_min() >= bound * 0.95);
  }
}

TEST_CASE("cardinality growth approaches the entropy") {
  auto check = [](const systems::SmaleSystem& sys, int depth) {
    auto covers = refine_range(sys, depth);
    double h = std::log(sys.base_parry().lambda);
    for (int n = depth - 2; n <= depth; ++n) {
      double v = std::log(static_cast<double>(covers[n - 1].count())) / (2.0 * n);
      CHECK(std::abs(v - h) <= 0.05);
    }
  };
  check(*make_system("catmap"), 6);
  check(*make_system("full2"), 9);
  check(*make_system("golden"), 8);
}

TEST_CASE("normality constant and neighbour bound") {
  auto full2 = make_system("full2");
  auto covers = refine_range(*full2, 4);
  int n0 = normality_constant(covers);
  CHECK(n0 == 1);  // disjoint cylinders never share neighbours
  auto nb = neighbour_bound(covers, n0);
  CHECK(nb.sup_observed == 1);
  CHECK(nb.ok);

  auto cat = make_system("catmap");
  auto cc = refine_range(*cat, 5);
  int nc = normality_constant(cc);
  CHECK(nc >= 1);
  CHECK(nc <= 4);
  auto cb = neighbour_bound(cc, nc);
  CHECK(cb.sup_observed == 9);
  CHECK(cb.ok);

  // bound arithmetic: #R1 = 3, N = 2 gives 3^6 = 729
  auto full3 = make_system("full3");
  auto c3 = refine_range(*full3, 3);
  auto b3 = neighbour_bound(c3, 2);
  CHECK(b3.bound == 729);
}

TEST_CASE("delta search per system") {
  auto full2 = make_system("full2");
  auto base2 = refine(*full2, 1);
  auto d2 = delta_search(*full2, base2);
  CHECK(d2.delta1 == doctest::Approx(full2->constants().eps_dprime / 4));

  auto cat = make_system("catmap");
  auto basec = refine(*cat, 1);
  auto dc = delta_search(*cat, basec);
  CHECK(dc.delta1 > 0);
  CHECK(dc.delta1 <= dc.delta0);
  CHECK(dc.delta0 <= cat->constants().eps_dprime / 4 * (1 + 1e-12));

  auto sol = make_system("solenoid");
  auto bases = refine(*sol, 1);
  auto ds = delta_search(*sol, bases);
  CHECK(ds.delta1 > 0);
}

TEST_CASE("fattening is trivial for shifts and exact for the cat map") {
  auto full2 = make_system("full2");
  auto covers = refine_range(*full2, 4);
  std::vector<FatCover> fats;
  for (const auto& c : covers) fats.push_back(fatten(c, full2->constants().eps_dprime / 8));
  for (size_t i = 0; i < covers.size(); ++i) CHECK(fats[i].geom.get() == covers[i].geom.get());
  auto audit = fattening_audit(covers, fats);
  CHECK(audit.pass);

  CHECK_THROWS_AS(fatten(covers[0], 0.0), PreconditionError);  // fattening must be open

  auto cat = make_system("catmap");
  auto cc = refine_range(*cat, 5);
  auto dc = delta_search(*cat, cc[0]);
  std::vector<FatCover> cf;
  for (const auto& c : cc) cf.push_back(fatten(c, dc.delta1 / 2));
  auto ca = fattening_audit(cc, cf);
  CHECK(ca.pass);
  CHECK(ca.violations.empty());

  // counts and multiplicities preserved
  for (size_t i = 0; i < cc.size(); ++i) {
    CHECK(cf[i].count == cc[i].count());
    CHECK(cf[i].geom->multiplicity() == cc[i].geom->multiplicity());
  }

  // an oversized delta is reported by the audit rather than asserted
  bool threw = false;
  try {
    std::vector<FatCover> wild;
    for (const auto& c : cc) wild.push_back(fatten(c, 0.05));
    auto wa = fattening_audit(cc, wild);
    if (!wa.pass) CHECK(!wa.violations.empty());
  } catch (const PreconditionError&) {
    threw = true;  // DeltaTooLarge is also a legitimate outcome
  }
  (void)threw;
}

TEST_CASE("solenoid fattened covers keep multiplicity two") {
  auto sol = make_system("solenoid");
  auto covers = refine_range(*sol, 5);
  auto ds = delta_search(*sol, covers[0]);
  for (const auto& c : covers) {
    auto fat = fatten(c, ds.delta1 / 2);
    CHECK(fat.geom->multiplicity() == 2);
    CHECK(fat.count == c.count());
  }
  auto st = cover_stats(covers[3], {2000, 1});
  CHECK(st.multiplicity == 2);
  double r4 = covers[3].geom->diam_max() / covers[2].geom->diam_max();
  CHECK(1.0 / r4 >= 1.8);
  CHECK(1.0 / r4 <= 2.2);
}

TEST_CASE("lebesgue numbers of fattened covers") {
  auto full2 = make_system("full2");
  auto covers = refine_range(*full2, 5);
  for (const auto& c : covers) {
    auto fat = fatten(c, full2->constants().eps_dprime / 8);
    // clopen cylinders: distance to the complement is one scale above
    CHECK(lebesgue(fat, 400, 7) == doctest::Approx(std::ldexp(1.0, -(c.level - 1))));
  }

  auto cat = make_system("catmap");
  auto cc = refine_range(*cat, 5);
  auto dc = delta_search(*cat, cc[0]);
  std::vector<double> leb;
  for (const auto& c : cc) leb.push_back(lebesgue(fatten(c, dc.delta1 / 2), 20000, 7));
  for (size_t i = 0; i + 1 < leb.size(); ++i) {
    CHECK(leb[i] > 0);
    CHECK(leb[i + 1] / leb[i] >= 1.0 / kLam * 0.9);
  }
}

TEST_CASE("clustering counts") {
  auto full2 = make_system("full2");
  auto covers = refine_range(*full2, 8);
  auto centers = systems::sample_points(*full2, 40, 11);
  std::vector<double> radii;
  for (int k = 2; k <= 6; ++k) radii.push_back(std::ldexp(1.0, -k));
  auto rep = ufcp(*full2, covers, radii, centers);
  CHECK(rep.sup_count == 1);  // closed balls are cylinders
  for (const auto& row : rep.table) {
    CHECK_FALSE(row.depth_exceeded);
    CHECK(row.count == 1);
  }

  std::vector<double> bad{2.0};
  CHECK_THROWS_AS(ufcp(*full2, covers, bad, centers), PreconditionError);

  // radii below the deepest built level are marked, never fabricated
  auto shallow = refine_range(*full2, 2);
  auto rep2 = ufcp(*full2, shallow, {std::ldexp(1.0, -6)}, centers);
  for (const auto& row : rep2.table) CHECK(row.depth_exceeded);
}

TEST_CASE("cat map clustering is uniformly bounded with a matched-scale plateau") {
  auto cat = make_system("catmap");
  auto covers = refine_range(*cat, 6);
  auto centers = systems::sample_points(*cat, 100, 13);

  // dyadic radii: counts stay bounded but oscillate with log_lambda(r) mod 1
  std::vector<double> radii;
  for (int k = 3; k <= 6; ++k) radii.push_back(std::ldexp(1.0, -k));
  auto rep = ufcp(*cat, covers, radii, centers);
  CHECK(rep.sup_count >= 1);
  CHECK(rep.sup_count <= 120);

  // radii matched to the cover scale show the self-similar plateau
  std::vector<double> matched;
  for (int n = 3; n <= 6; ++n) matched.push_back(1.5 * covers[n - 1].geom->diam_max());
  auto rep2 = ufcp(*cat, covers, matched, centers);
  std::map<double, int> per_scale;
  for (const auto& row : rep2.table)
    if (!row.depth_exceeded) per_scale[row.r] = std::max(per_scale[row.r], row.count);
  REQUIRE(per_scale.size() == 4);
  int lo = 1 << 20, hi = 0;
  for (auto& [r, v] : per_scale) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo <= 2);
}
