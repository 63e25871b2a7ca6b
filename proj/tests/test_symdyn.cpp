#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "smalelab/rng.hpp"
#include "smalelab/symdyn.hpp"

using namespace smalelab;
using namespace smalelab::symdyn;

namespace {

// independent oracle: count admissible words by explicit enumeration
long brute_count(const TransitionMatrix& m, int len) {
  long total = 0;
  std::vector<int> w(len, 1);
  while (true) {
    bool ok = true;
    for (int i = 0; i + 1 < len; ++i)
      if (!m.allows(w[i], w[i + 1])) ok = false;
    if (ok) ++total;
    int p = len - 1;
    while (p >= 0 && w[p] == m.size()) w[p--] = 1;
    if (p < 0) break;
    ++w[p];
  }
  return total;
}

// independent oracle: positive root of x^2 - x - 1 by bisection
double golden_root() {
  double lo = 1, hi = 2;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (mid * mid - mid - 1 < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("matrix validation classifies the stock examples") {
  auto full = TransitionMatrix::full_shift(2);
  auto c1 = validate_matrix(full);
  CHECK(c1.primitive);
  CHECK(c1.irreducible);
  CHECK(c1.witness_power == 1);

  auto golden = TransitionMatrix::golden_mean();
  auto c2 = validate_matrix(golden);
  CHECK(c2.primitive);
  CHECK(c2.witness_power == 2);  // squaring the matrix by hand gives all ones

  TransitionMatrix period2(2, {0, 1, 1, 0});
  auto c3 = validate_matrix(period2);
  CHECK(c3.irreducible);
  CHECK_FALSE(c3.primitive);

  CHECK_THROWS_AS(TransitionMatrix(2, {1, 1, 0, 0}), PreconditionError);  // zero column
  CHECK_THROWS_AS(TransitionMatrix(2, {0, 0, 1, 1}), PreconditionError);  // zero row
}

TEST_CASE("perron data for the stock chains") {
  auto full2 = TransitionMatrix::full_shift(2);
  auto pd = perron(full2);
  CHECK(pd.lambda == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(pd.u[0] == doctest::Approx(pd.u[1]).epsilon(1e-14));
  CHECK(pd.v[0] * pd.u[0] + pd.v[1] * pd.u[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pd.residual <= 1e-12);

  auto pg = perron(TransitionMatrix::golden_mean());
  CHECK(pg.lambda == doctest::Approx(golden_root()).epsilon(1e-12));

  CHECK(perron(TransitionMatrix::full_shift(3)).lambda == doctest::Approx(3.0).epsilon(1e-13));

  TransitionMatrix period2(2, {0, 1, 1, 0});
  CHECK_THROWS_AS(perron(period2), PreconditionError);
}

TEST_CASE("entropy values") {
  CHECK(entropy(TransitionMatrix::full_shift(2)) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(entropy(TransitionMatrix::golden_mean()) == doctest::Approx(0.4812118).epsilon(1e-7));
  CHECK(entropy(TransitionMatrix::full_shift(5)) == doctest::Approx(std::log(5.0)).epsilon(1e-13));
}

TEST_CASE("cylinder measures") {
  auto full2 = TransitionMatrix::full_shift(2);
  auto mu2 = parry(full2);
  // uniform Bernoulli oracle: rank-3 symmetric cylinder has mass 2^-3
  auto out = cylinder_measure(mu2, full2, {1, 2, 1});
  CHECK(out.admissible);
  CHECK(out.measure == doctest::Approx(0.125).epsilon(1e-14));

  auto golden = TransitionMatrix::golden_mean();
  auto mug = parry(golden);
  // p_1 = phi^2/(phi^2+1) from the eigenvectors
  double phi = golden_root();
  CHECK(cylinder_measure(mug, golden, {1}).measure ==
        doctest::Approx(phi * phi / (phi * phi + 1)).epsilon(1e-10));
  CHECK(cylinder_measure(mug, golden, {1}).measure == doctest::Approx(0.7236068).epsilon(1e-7));

  auto bad = cylinder_measure(mug, golden, {1, 2, 2});
  CHECK_FALSE(bad.admissible);  // a distinct outcome, not an error
  CHECK(bad.measure == 0.0);
}

TEST_CASE("word counting matches brute force and grows exactly") {
  auto golden = TransitionMatrix::golden_mean();
  CHECK(count_words(golden, 3) == 5);
  CHECK(count_words(golden, 5) == 13);
  for (int m = 1; m <= 12; ++m) {
    CHECK(count_words(golden, m) == brute_count(golden, m));
  }
  auto full2 = TransitionMatrix::full_shift(2);
  for (int m : {1, 5, 17}) {
    BigInt expect = BigInt(1) << m;
    CHECK(count_words(full2, m) == expect);
  }
  // far beyond 64-bit range
  BigInt big = count_words(TransitionMatrix::full_shift(4), 64);
  CHECK(big == boost::multiprecision::pow(BigInt(4), 64));
}

TEST_CASE("word type and serialization") {
  auto golden = TransitionMatrix::golden_mean();
  auto w = Word::make(golden, {1, 2, 1}, -1);
  REQUIRE(w.has_value());
  CHECK(w->str() == "1,2,1@-1");
  auto parsed = Word::parse(golden, "1,2,1@-1");
  REQUIRE(parsed.has_value());
  CHECK(parsed->symbols == w->symbols);
  CHECK(parsed->offset == -1);
  CHECK_FALSE(Word::make(golden, {2, 2}, 0).has_value());
  CHECK_FALSE(Word::parse(golden, "2,2@0").has_value());
  CHECK(w->at(0) == 2);
  CHECK(w->at(-1) == 1);
}

TEST_CASE("shift ultrametric on truncated points") {
  auto mk = [](std::vector<int> w) {
    ShiftPoint p;
    p.depth = (static_cast<int>(w.size()) - 1) / 2;
    p.window = std::move(w);
    return p;
  };
  auto x = mk({1, 2, 1, 1, 2, 1, 2});
  auto same = mk({1, 2, 1, 1, 2, 1, 2});
  auto d0 = word_metric(x, same);
  CHECK(d0.zero);
  CHECK(d0.error_bound == doctest::Approx(std::ldexp(1.0, -3)));

  auto y = mk({1, 2, 1, 2, 2, 1, 2});  // differs at index 0
  CHECK(word_metric(x, y).value() == 1.0);

  // agree for |i| <= 2, differ at i = 3
  ShiftPoint a, b;
  a.depth = b.depth = 3;
  a.window = {1, 1, 1, 1, 1, 1, 1};
  b.window = {1, 1, 1, 1, 1, 1, 2};
  auto d = word_metric(a, b);
  CHECK_FALSE(d.zero);
  CHECK(d.exponent == 3);
  CHECK(d.value() == doctest::Approx(0.125));

  ShiftPoint shallow = mk({1, 1, 1});
  ShiftPoint deep = mk({1, 1, 1, 1, 1, 1, 1});
  CHECK_THROWS_AS(word_metric(shallow, deep), PreconditionError);
}

TEST_CASE("lexicographic enumeration") {
  auto golden = TransitionMatrix::golden_mean();
  std::vector<std::vector<int>> seen;
  enumerate_admissible(golden, 2, [&](const std::vector<int>& w) { seen.push_back(w); });
  CHECK(seen == std::vector<std::vector<int>>{{1, 1}, {1, 2}, {2, 1}});

  auto full2 = TransitionMatrix::full_shift(2);
  auto words = enumerate_admissible(full2, 1, 0);
  REQUIRE(words.size() == 2);
  CHECK(words[0].symbols == std::vector<int>{1});

  // stream agrees with the counting identity at every length
  for (int m = 1; m <= 10; ++m) {
    long n = 0;
    enumerate_admissible(golden, m, [&](const std::vector<int>&) { ++n; });
    CHECK(BigInt(n) == count_words(golden, m));
  }
}

TEST_CASE("total mass per rank is one") {
  for (auto m : {TransitionMatrix::full_shift(2), TransitionMatrix::golden_mean(),
                 TransitionMatrix::full_shift(3)}) {
    auto mu = parry(m);
    for (int rank = 1; rank <= 9; rank += 2) {
      double total = 0;
      enumerate_admissible(m, rank,
                           [&](const std::vector<int>& w) { total += cylinder_measure(mu, m, w).measure; });
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("measure is offset independent and Markov consistent") {
  auto golden = TransitionMatrix::golden_mean();
  auto mu = parry(golden);
  auto w1 = Word::make(golden, {1, 2, 1}, -1);
  auto w2 = Word::make(golden, {1, 2, 1}, 4);
  CHECK(cylinder_measure(mu, *w1) == cylinder_measure(mu, *w2));
  // mu(C_w) equals the sum over admissible one-symbol extensions
  enumerate_admissible(golden, 4, [&](const std::vector<int>& w) {
    double lhs = cylinder_measure(mu, golden, w).measure;
    double rhs = 0;
    for (int a = 1; a <= 2; ++a) {
      auto ext = w;
      ext.push_back(a);
      rhs += cylinder_measure(mu, golden, ext).measure;
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  });
}

TEST_CASE("ultrametric inequality holds exactly on sampled triples") {
  auto golden = TransitionMatrix::golden_mean();
  auto mu = parry(golden);
  Rng rng(42);
  for (int t = 0; t < 10000; ++t) {
    auto x = ShiftPoint::random(golden, mu, 8, rng);
    auto y = ShiftPoint::random(golden, mu, 8, rng);
    auto z = ShiftPoint::random(golden, mu, 8, rng);
    auto dxz = word_metric(x, z);
    auto dxy = word_metric(x, y);
    auto dyz = word_metric(y, z);
    if (dxz.zero) continue;
    // d(x,z) <= max(d(x,y), d(y,z)) as exact exponents
    int rhs = std::min(dxy.zero ? 1 << 20 : dxy.exponent, dyz.zero ? 1 << 20 : dyz.exponent);
    CHECK(dxz.exponent >= rhs);
  }
}

TEST_CASE("word-count growth bounds with frozen constants") {
  // frozen regression goldens for eps = 0.1: full2 (c=1, C=1, n in 4..16),
  // golden (c=1, C=1.5, n in 2..16)
  const double eps = 0.1;
  auto check_band = [&](const TransitionMatrix& m, double c, double C, int n0, int n1) {
    double h = entropy(m);
    for (int n = n0; n <= n1; ++n) {
      double count = count_words(m, 2 * n - 1).convert_to<double>();
      CHECK(count > c * std::exp(2 * (h - eps) * n));
      CHECK(count < C * std::exp(2 * (h + eps) * n));
    }
  };
  check_band(TransitionMatrix::full_shift(2), 1.0, 1.0, 4, 16);
  check_band(TransitionMatrix::golden_mean(), 1.0, 1.5, 2, 16);
}

TEST_CASE("symmetric cylinder masses stay in the eigendata band") {
  for (auto m : {TransitionMatrix::full_shift(2), TransitionMatrix::golden_mean()}) {
    auto mu = parry(m);
    double d = mu.cylinder_bound();
    CHECK(d >= 1.0);
    for (int n = 1; n <= 6; ++n) {
      int rank = 2 * n - 1;
      double scale = std::pow(mu.lambda, 2 * n);
      enumerate_admissible(m, rank, [&](const std::vector<int>& w) {
        double ratio = cylinder_measure(mu, m, w).measure * scale;
        CHECK(ratio >= 1.0 / d * (1 - 1e-9));
        CHECK(ratio <= d * (1 + 1e-9));
      });
    }
  }
}

TEST_CASE("random shift points are admissible") {
  auto golden = TransitionMatrix::golden_mean();
  auto mu = parry(golden);
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    auto p = ShiftPoint::random(golden, mu, 10, rng);
    for (size_t i = 0; i + 1 < p.window.size(); ++i) CHECK(golden.allows(p.window[i], p.window[i + 1]));
  }
}

TEST_CASE("matrix file round trip") {
  auto path = std::string("/tmp/smalelab_test_matrix.txt");
  {
    FILE* f = fopen(path.c_str(), "w");
    fputs("2\n1 1\n1 0\n", f);
    fclose(f);
  }
  auto m = TransitionMatrix::from_file(path);
  CHECK(m.size() == 2);
  CHECK(m.allows(1, 2));
  CHECK_FALSE(m.allows(2, 2));
}
