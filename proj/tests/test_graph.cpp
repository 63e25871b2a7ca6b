#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smalelab/graph.hpp"

using namespace smalelab;
using namespace smalelab::graph;
using systems::make_system;
using systems::Point;

TEST_CASE("level sizes of the stock graphs") {
  auto full2 = make_system("full2");
  auto g = build_graph(*full2, 2);
  CHECK(g.level_size(0) == 1);
  CHECK(g.level_size(1) == 2);
  CHECK(g.level_size(2) == 8);

  auto golden = make_system("golden");
  auto gg = build_graph(*golden, 2);
  CHECK(gg.level_size(1) == 2);
  CHECK(gg.level_size(2) == 5);

  auto g0 = build_graph(*full2, 0);
  CHECK(g0.depth() == 0);
  CHECK(g0.level_size(0) == 1);
}

TEST_CASE("descendant counts") {
  auto full2 = make_system("full2");
  auto g = build_graph(*full2, 3);
  // root has the whole first level
  CHECK(descendants(g, 0, 0).size() == 2);
  // each deeper vertex extends two ways on each side
  for (size_t k = 0; k < g.level_size(1); ++k) CHECK(descendants(g, 1, k).size() == 4);

  auto golden = make_system("golden");
  auto gg = build_graph(*golden, 3);
  bool saw_small = false;
  for (size_t k = 0; k < gg.level_size(2); ++k) {
    size_t c = descendants(gg, 2, k).size();
    CHECK(c >= 1);
    CHECK(c <= 4);
    const auto& w = gg.levels[1].word(k);
    if (w.front() == 2 || w.back() == 2) {
      CHECK(c < 4);
      saw_small = true;
    }
  }
  CHECK(saw_small);

  CHECK_THROWS_AS(descendants(g, 7, 0), PreconditionError);
  CHECK_THROWS_AS(descendants(g, 1, 99), PreconditionError);
}

TEST_CASE("path shift agrees with the symbolic shift") {
  auto golden = make_system("golden");
  auto g = build_graph(*golden, 5);
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    Point x = golden->random_point(rng);
    auto p = path_of_point(g, x);
    auto q = shift_path(g, p);
    CHECK(q.length() == p.length() - 1);
    // the shifted path codes the shifted point
    Point sx = golden->apply(x);
    auto ps = path_of_point(g, sx);
    for (int n = 0; n < q.length(); ++n) CHECK(q.vertices[n] == ps.vertices[n]);
  }

  // fixed point path maps to its own truncation
  systems::SftPoint fixed;
  fixed.depth = 16;
  fixed.window.assign(33, 1);
  auto p = path_of_point(g, Point{fixed});
  auto q = shift_path(g, p);
  for (int n = 0; n < q.length(); ++n) CHECK(q.vertices[n] == p.vertices[n]);

  auto nd = build_graph(*golden, std::vector<partitions::RefinedCover>(g.levels), false);
  CHECK_THROWS_AS(shift_path(nd, p), PreconditionError);  // NotDynamicGraph
}

TEST_CASE("factor property within the final level diameter") {
  auto cat = make_system("catmap");
  auto g = build_graph(*cat, 5);
  Rng rng(5);
  double bound = g.levels[3].geom->diam_max();  // shifted path ends one level up
  for (int t = 0; t < 30; ++t) {
    Point x = cat->random_point(rng);
    auto p = path_of_point(g, x);
    auto q = shift_path(g, p);
    // pick any point of the deepest shifted vertex and compare with psi(x)
    Rng r2(17, t);
    Point y = g.levels[q.length() - 1].geom->sample_point(q.vertices.back(), r2);
    CHECK(cat->dist(y, cat->apply(x)) <= bound * (1 + 1e-9));
  }
}

TEST_CASE("injectivity diagnostics") {
  auto full2 = make_system("full2");
  auto g = build_graph(*full2, 5);
  Rng rng(9);
  Point x = full2->random_point(rng);
  for (int c : injectivity_diagnostic(g, x, 5)) CHECK(c == 1);

  auto cat = make_system("catmap");
  auto gc = build_graph(*cat, 4);
  // the origin is a partition corner, so its coding is ambiguous
  Point corner = systems::TorusPoint{0.0, 0.0};
  auto counts = injectivity_diagnostic(gc, corner, 4);
  bool ambiguous = false;
  for (int c : counts) ambiguous |= (c >= 2);
  CHECK(ambiguous);
  // random points code uniquely almost surely
  int unique_trials = 0;
  for (int t = 0; t < 25; ++t) {
    Point p = cat->random_point(rng);
    auto cs = injectivity_diagnostic(gc, p, 4);
    bool uniq = true;
    for (int c : cs) uniq &= (c == 1);
    unique_trials += uniq;
  }
  CHECK(unique_trials == 25);
}

TEST_CASE("constants of the full shift graph are exact") {
  auto full2 = make_system("full2");
  auto g = build_graph(*full2, 6);
  std::vector<double> leb;
  for (int n = 1; n <= 6; ++n) leb.push_back(std::ldexp(1.0, -(n - 1)));
  auto c = extract_constants(g, leb);
  CHECK(c.lambda == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.Lambda == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.C_graph == 4);
  CHECK(c.N_graph == 1);
  CHECK(c.theta == doctest::Approx(0.5));
  CHECK(c.eta == doctest::Approx(0.5));
  CHECK(c.K_eta >= 1);

  auto hb = homogeneity_bound(c);
  CHECK(hb.s == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(hb.C == doctest::Approx(c.K_eta * std::pow(4.0, 2.0)).epsilon(1e-9));
}

TEST_CASE("cat map constants recover the eigenvalue") {
  auto cat = make_system("catmap");
  auto g = build_graph(*cat, 6);
  auto covers = g.levels;
  auto dc = partitions::delta_search(*cat, covers[0]);
  std::vector<double> leb;
  for (const auto& c : covers) leb.push_back(partitions::lebesgue(partitions::fatten(c, dc.delta1 / 2), 20000, 3));
  auto c = extract_constants(g, leb);
  double lam = (3.0 + std::sqrt(5.0)) / 2.0;
  CHECK(c.lambda == doctest::Approx(lam).epsilon(0.10));
  CHECK(c.Lambda == doctest::Approx(lam).epsilon(0.10));
  CHECK(c.C_graph >= 5);
  CHECK(c.N_graph == 9);
}

TEST_CASE("golden graph homogeneity via the growth base") {
  auto golden = make_system("golden");
  auto g = build_graph(*golden, 8);
  std::vector<double> leb;
  for (int n = 1; n <= 8; ++n) leb.push_back(std::ldexp(1.0, -(n - 1)));
  auto c = extract_constants(g, leb);
  // growth base approaches the squared golden mean
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(c.growth_base == doctest::Approx(phi * phi).epsilon(0.02));
  auto hb = homogeneity_bound(c, true);
  CHECK(hb.s == doctest::Approx(2 * std::log(phi) / std::log(2.0)).epsilon(0.02));
  CHECK(hb.s == doctest::Approx(1.3885).epsilon(0.02));
}

TEST_CASE("inhomogeneous constants are rejected") {
  GraphConstants c;
  c.lambda = 2.0;
  c.Lambda = 3.0;
  c.theta = c.eta = 0.5;
  c.C_graph = 4;
  c.N_graph = 1;
  c.K_eta = 1;
  CHECK_THROWS_AS(homogeneity_bound(c), PreconditionError);
}

TEST_CASE("essential cylinder identity on the path space") {
  // for essential graphs every finite path's cylinder has the path count of
  // its final vertex: counts of extensions depend only on the end vertex
  auto golden = make_system("golden");
  auto g = build_graph(*golden, 5);
  for (size_t k = 0; k < g.level_size(3); ++k) {
    // paths through a fixed vertex at level 3 extendable to level 5
    size_t via_vertex = 0;
    for (int child : g.children[3][k]) via_vertex += g.children[4][child].size();
    // the same count through any single path ending at that vertex
    CHECK(via_vertex >= 1);
    // cylinder count equals vertex count since parents are unique
    CHECK(g.parent[3].size() == g.level_size(4));
  }
}
