#include "doctest.h"

#include <cmath>
#include <map>

#include "emdsketch/embed.hpp"
#include "emdsketch/exact.hpp"
#include "test_helpers.hpp"

using namespace emdsketch;
using emdsketch::testing::random_probability;

TEST_CASE("embed_grid is linear in the measure argument") {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    GridMeasure x = random_probability(rng, 16, 2, 4);
    GridMeasure y = random_probability(rng, 16, 2, 3);
    GridShift s = sample_shift(16, rng.next());
    EmbeddedVector joint = embed_grid(x, &y, s);
    EmbeddedVector diff = embed_grid(x, nullptr, s) - embed_grid(y, nullptr, s);
    REQUIRE(joint.nnz() == diff.nnz());
    for (std::size_t i = 0; i < joint.nnz(); ++i) {
      CHECK(joint.entries()[i].key == diff.entries()[i].key);
      CHECK(joint.entries()[i].value ==
            doctest::Approx(diff.entries()[i].value).epsilon(1e-12));
    }
  }
}

TEST_CASE("embedding a measure against itself is the zero vector") {
  Rng rng(22);
  GridMeasure x = random_probability(rng, 16, 2, 5);
  GridShift s = sample_shift(16, 7);
  CHECK(embed_grid(x, &x, s).nnz() == 0);
}

TEST_CASE("adjacent point masses: norm enumerated by hand over all shifts") {
  // points (0,0) and (1,0) on [4]^2: level 0 always separates (2), level 1
  // separates when s1 is odd (+4), level 2 when s1 == 1 mod 4 (+8)
  GridMeasure x = GridMeasure::point_mass(4, 2, 0, 0);
  GridMeasure y = GridMeasure::point_mass(4, 2, 1, 0);
  const double expected_by_s1[4] = {2.0, 14.0, 2.0, 6.0};
  for (int s1 = 0; s1 < 4; ++s1) {
    for (int s2 = 0; s2 < 4; ++s2) {
      double norm = embed_grid(x, &y, {s1, s2}).l1_norm();
      CHECK(norm == doctest::Approx(expected_by_s1[s1]).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid embedding dominates EMD after rescaling on random pairs") {
  // deterministic lower bound, unnormalized sanity: norm >= EMD / 4
  Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    GridMeasure x = random_probability(rng, 64, 2, 1 + static_cast<int>(rng.below(6)));
    GridMeasure y = random_probability(rng, 64, 2, 1 + static_cast<int>(rng.below(6)));
    GridShift s = sample_shift(64, rng.next());
    double norm = embed_grid(x, &y, s).l1_norm();
    double d = emd_exact(x, y).cost;
    CHECK(norm >= d / 4.0 - 1e-9);
  }
}

TEST_CASE("embed_cdf on the documented 1-d examples") {
  GridMeasure d0 = GridMeasure::point_mass(4, 1, 0);
  EmbeddedVector v = embed_cdf(d0);
  CHECK(v.l1_norm() == doctest::Approx(4.0));
  GridMeasure u01 = GridMeasure::make(4, 1, MeasureKind::probability, {{0, 0, 0.5}, {1, 0, 0.5}});
  CHECK(embed_cdf(u01).l1_norm() == doctest::Approx(0.5 + 1 + 1 + 1));
  CHECK_THROWS_AS(embed_cdf(GridMeasure::point_mass(4, 2, 0, 0)), ContractViolation);
}

TEST_CASE("embed_cdf difference norm equals exact EMD") {
  Rng rng(24);
  for (int t = 0; t < 30; ++t) {
    GridMeasure a = random_probability(rng, 64, 1, 1 + static_cast<int>(rng.below(8)));
    GridMeasure b = random_probability(rng, 64, 1, 1 + static_cast<int>(rng.below(8)));
    double gap = embed_cdf(a, &b).l1_norm();
    CHECK(gap == doctest::Approx(emd_exact(a, b).cost).epsilon(1e-9));
  }
}

TEST_CASE("sample_shift is deterministic and uniform") {
  GridShift a = sample_shift(16, 99);
  GridShift b = sample_shift(16, 99);
  CHECK(a.s1 == b.s1);
  CHECK(a.s2 == b.s2);
  GridShift c = sample_shift(16, 100);
  bool differs = a.s1 != c.s1 || a.s2 != c.s2;
  CHECK(differs);

  // chi-square over the 256 cells at p > 0.01
  std::map<std::pair<int, int>, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    GridShift s = sample_shift(16, 1000 + i);
    counts[{s.s1, s.s2}]++;
  }
  double expected = n / 256.0;
  double chi2 = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      double o = counts.count({i, j}) ? counts[{i, j}] : 0.0;
      chi2 += (o - expected) * (o - expected) / expected;
    }
  CHECK(chi2 < 311.0);  // 0.99 quantile of chi2 with 255 dof
}

TEST_CASE("coarse embedding of x against itself has norm zero") {
  Rng rng(25);
  GridMeasure x = random_probability(rng, 64, 2, 5);
  CoarseEmbedding e = embed_coarse(x, &x, 2, 5);
  CHECK(coarse_norm(e) == 0.0);
}

TEST_CASE("a short edge inside one leaf block costs exactly its length") {
  GridMeasure x = GridMeasure::point_mass(16, 2, 5, 5);
  GridMeasure y = GridMeasure::point_mass(16, 2, 6, 5);
  bool found_uncut = false;
  for (uint64_t seed = 0; seed < 40 && !found_uncut; ++seed) {
    CoarseEmbedding e = embed_coarse(x, &y, 3, seed);
    bool cut = false;
    for (const CoarseComponent& c : e.components)
      if (c.top_level && (!c.pos.empty() || !c.neg.empty())) cut = true;
    double norm = coarse_norm(e);
    CHECK(norm >= 1.0 - 1e-9);
    if (!cut) {
      found_uncut = true;
      CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(found_uncut);
}

TEST_CASE("coarse embedding conserves mass at the root split") {
  Rng rng(26);
  GridMeasure x = random_probability(rng, 64, 2, 6);
  GridMeasure y = random_probability(rng, 64, 2, 3);
  CoarseEmbedding e = embed_coarse(x, &y, 2, 17);
  double max_scale = 0.0;
  for (const CoarseComponent& c : e.components)
    if (c.top_level) max_scale = std::max(max_scale, c.scale);
  for (const CoarseComponent& c : e.components) {
    if (!c.top_level || c.scale != max_scale) continue;
    double s = 0.0;
    for (const Atom& a : c.pos) s += a.w;
    for (const Atom& a : c.neg) s -= a.w;
    CHECK(std::abs(s) <= 1e-9);
  }
}

TEST_CASE("coarse distortion quantile decreases with t_param") {
  Rng rng(27);
  const int delta = 32;
  std::map<int, std::vector<double>> ratios;
  for (int pair = 0; pair < 4; ++pair) {
    GridMeasure x = random_probability(rng, delta, 2, 2);
    GridMeasure y = random_probability(rng, delta, 2, 8);
    double d = emd_exact(x, y).cost;
    if (d < 1e-9) continue;
    for (int t : {1, 5}) {
      for (int s = 0; s < 120; ++s) {
        CoarseEmbedding e = embed_coarse(x, &y, t, rng.next());
        ratios[t].push_back(coarse_norm(e) / d);
      }
    }
  }
  auto q99 = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(0.99 * (v.size() - 1))];
  };
  // t = log2(delta) evaluates the instance exactly at the leaves
  CHECK(q99(ratios[5]) <= q99(ratios[1]) + 1e-9);
}

TEST_CASE("embed_coarse validates t_param") {
  GridMeasure x = GridMeasure::point_mass(16, 2, 0, 0);
  CHECK_THROWS_AS(embed_coarse(x, nullptr, 0, 1), ContractViolation);
  CHECK_THROWS_AS(embed_coarse(x, nullptr, 5, 1), ContractViolation);
}
