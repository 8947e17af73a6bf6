#include "doctest.h"

#include <cmath>

#include "emdsketch/exact.hpp"
#include "emdsketch/measure.hpp"
#include "test_helpers.hpp"

using namespace emdsketch;
using emdsketch::testing::random_probability;
using emdsketch::testing::transport_tree_oracle;

TEST_CASE("emd_exact moves a unit mass by its l1 distance") {
  GridMeasure a = GridMeasure::point_mass(8, 2, 0, 0);
  GridMeasure b = GridMeasure::point_mass(8, 2, 3, 4);
  EmdResult r = emd_exact(a, b);
  CHECK(r.cost == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(r.plan.edges.size() == 1);
  CHECK(r.plan.cost(8, 2) == doctest::Approx(7.0));
}

TEST_CASE("emd_exact of a measure with itself is zero with an empty plan") {
  Rng rng(11);
  GridMeasure a = random_probability(rng, 16, 2, 5);
  EmdResult r = emd_exact(a, a);
  CHECK(r.cost == 0.0);
  CHECK(r.plan.edges.empty());
}

TEST_CASE("emd_exact matches the spanning-tree transportation oracle") {
  Rng rng(12);
  for (int t = 0; t < 40; ++t) {
    GridMeasure a = random_probability(rng, 8, 2, 3);
    GridMeasure b = random_probability(rng, 8, 2, 3);
    double oracle = transport_tree_oracle(a, b);
    double got = emd_exact(a, b).cost;
    CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("emd_exact penalizes unmatched mass at the diameter rate") {
  // one unit moved a distance 1, one unit left over at D = 2*8 = 16
  GridMeasure a = GridMeasure::make(8, 2, MeasureKind::general, {{0, 0, 2.0}});
  GridMeasure b = GridMeasure::make(8, 2, MeasureKind::general, {{1, 0, 1.0}});
  EmdResult r = emd_exact(a, b);
  CHECK(r.cost == doctest::Approx(1.0 + 16.0).epsilon(1e-12));
  CHECK(r.plan.slack_source_mass == doctest::Approx(1.0));
  CHECK(r.plan.cost(8, 2) == doctest::Approx(r.cost));

  GridMeasure empty = GridMeasure::make(8, 2, MeasureKind::general, {});
  CHECK(emd_exact(a, empty).cost == doctest::Approx(32.0));
}

TEST_CASE("emd_exact rejects grid mismatches") {
  GridMeasure a = GridMeasure::point_mass(8, 2, 0, 0);
  GridMeasure b = GridMeasure::point_mass(16, 2, 0, 0);
  CHECK_THROWS_AS(emd_exact(a, b), ContractViolation);
  GridMeasure c = GridMeasure::point_mass(8, 1, 0);
  CHECK_THROWS_AS(emd_exact(a, c), ContractViolation);
}

TEST_CASE("transport plans certify their reported cost") {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    GridMeasure a = random_probability(rng, 16, 2, 4);
    GridMeasure b = random_probability(rng, 16, 2, 4);
    EmdResult r = emd_exact(a, b);
    CHECK(r.plan.cost(16, 2) == doctest::Approx(r.cost).epsilon(1e-9));
  }
}

TEST_CASE("emd is homogeneous under joint scaling") {
  Rng rng(14);
  GridMeasure a = random_probability(rng, 16, 2, 3);
  GridMeasure b = random_probability(rng, 16, 2, 4);
  double d = emd_exact(a, b).cost;
  CHECK(emd_exact(a.scaled(4.0), b.scaled(4.0)).cost == doctest::Approx(4.0 * d));
}

TEST_CASE("emd_cdf_1d on point masses and identical inputs") {
  GridMeasure a = GridMeasure::point_mass(3, 1, 0);
  GridMeasure b = GridMeasure::point_mass(3, 1, 2);
  CHECK(emd_cdf_1d(a, b) == doctest::Approx(2.0));
  CHECK(emd_cdf_1d(a, a) == 0.0);
}

TEST_CASE("emd_cdf_1d equals the flow solver on random 1-d pairs") {
  Rng rng(15);
  for (int t = 0; t < 50; ++t) {
    GridMeasure a = random_probability(rng, 64, 1, 1 + static_cast<int>(rng.below(8)));
    GridMeasure b = random_probability(rng, 64, 1, 1 + static_cast<int>(rng.below(8)));
    CHECK(std::abs(emd_cdf_1d(a, b) - emd_exact(a, b).cost) <= 1e-9);
  }
}

TEST_CASE("emd_cdf_1d rejects non-probability and 2-d inputs") {
  GridMeasure g = GridMeasure::make(8, 1, MeasureKind::general, {{0, 0, 2.0}});
  CHECK_THROWS_AS(emd_cdf_1d(g, g), ContractViolation);
  GridMeasure p2 = GridMeasure::point_mass(8, 2, 0, 0);
  CHECK_THROWS_AS(emd_cdf_1d(p2, p2), ContractViolation);
}

TEST_CASE("best_k_sparse recovers point-mass supports exactly") {
  GridMeasure x = GridMeasure::make(8, 2, MeasureKind::probability,
                                    {{1, 1, 0.5}, {6, 2, 0.5}});
  KSparseResult r = best_k_sparse(x, 2);
  CHECK(r.cost == 0.0);
  CHECK(r.approx == x);
}

TEST_CASE("best_k_sparse on the three-point example") {
  GridMeasure x = GridMeasure::make(
      8, 2, MeasureKind::probability,
      {{0, 0, 1.0 / 3}, {0, 1, 1.0 / 3}, {7, 7, 1.0 / 3}});
  KSparseResult r = best_k_sparse(x, 2);
  CHECK(r.cost == doctest::Approx(1.0 / 3).epsilon(1e-9));
  bool has_far = false;
  for (const Atom& c : r.centers) has_far = has_far || (c.x == 7 && c.y == 7);
  CHECK(has_far);
  CHECK(emd_exact(x, r.approx).cost == doctest::Approx(r.cost).epsilon(1e-9));
}

TEST_CASE("best_k_sparse with k = grid size has zero cost") {
  GridMeasure x = GridMeasure::make(3, 2, MeasureKind::probability,
                                    {{0, 0, 0.25}, {1, 2, 0.25}, {2, 1, 0.5}});
  KSparseResult r = best_k_sparse(x, 9);
  CHECK(r.cost == 0.0);
}

TEST_CASE("best_k_sparse cost is monotone nonincreasing in k") {
  Rng rng(16);
  GridMeasure x = random_probability(rng, 8, 2, 6);
  double prev = 1e300;
  for (int k = 1; k <= 4; ++k) {
    KSparseResult r = best_k_sparse(x, k);
    CHECK(r.cost <= prev + 1e-12);
    CHECK(emd_exact(x, r.approx).cost == doctest::Approx(r.cost).epsilon(1e-9));
    prev = r.cost;
  }
}

TEST_CASE("best_k_sparse rejects k above the candidate count") {
  GridMeasure x = GridMeasure::point_mass(8, 2, 0, 0);
  CHECK_THROWS_AS(best_k_sparse(x, 3, {{0, 0, 0.0}, {1, 1, 0.0}}), ContractViolation);
}

TEST_CASE("metric axioms hold on random triples") {
  Rng rng(17);
  for (int t = 0; t < 40; ++t) {
    GridMeasure a = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    GridMeasure b = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    GridMeasure c = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    double ab = emd_exact(a, b).cost;
    CHECK(std::abs(ab - emd_exact(b, a).cost) <= 1e-9);
    CHECK(ab <= emd_exact(a, c).cost + emd_exact(c, b).cost + 1e-9);
  }
}

TEST_CASE("check_granularity on the documented cases") {
  GridMeasure q4 = GridMeasure::make(4, 1, MeasureKind::probability, {{0, 0, 0.25}, {1, 0, 0.75}});
  CHECK(check_granularity(q4, {4}));
  CHECK(check_granularity(q4, {8}));
  GridMeasure thirds =
      GridMeasure::make(4, 1, MeasureKind::probability, {{0, 0, 1.0 / 3}, {1, 0, 2.0 / 3}});
  CHECK_FALSE(check_granularity(thirds, {4}));
}

TEST_CASE("measure invariants are enforced") {
  CHECK_THROWS_AS(GridMeasure::make(4, 2, MeasureKind::probability, {{0, 0, 0.5}}),
                  ContractViolation);  // mass != 1
  CHECK_THROWS_AS(GridMeasure::make(4, 2, MeasureKind::general, {{4, 0, 1.0}}),
                  ContractViolation);  // coordinate out of range
  CHECK_THROWS_AS(GridMeasure::make(4, 1, MeasureKind::general, {{0, 1, 1.0}}),
                  ContractViolation);  // y set on a 1-d measure
  // duplicate points merge through the builder
  GridMeasure m = GridMeasure::make(4, 2, MeasureKind::general, {{1, 1, 0.5}, {1, 1, 0.25}});
  CHECK(m.support_size() == 1);
  CHECK(m.total_mass() == doctest::Approx(0.75));
}
