#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "emdsketch/exact.hpp"
#include "emdsketch/nets.hpp"
#include "test_helpers.hpp"

using namespace emdsketch;
using emdsketch::testing::random_probability;

TEST_CASE("build_net returns an in-ball lattice covering the ball") {
  auto net = build_net({4, 4, 0.0}, 3.0, 16, 2, 100.0);
  CHECK(!net.empty());
  for (const Atom& p : net) {
    CHECK(std::abs(p.x - 4) + std::abs(p.y - 4) <= 3);
  }
  // spacing l/100 rounds to 1: every ball lattice point is present
  CHECK(net.size() == 25);  // |{d : |d|_1 <= 3}| = 2*3*(3+1)+1
}

TEST_CASE("cover_ball around a point mass covers all nearby point masses") {
  // mu = delta at (0,0), delta = 8, R = 2: every nu within distance 2 must be
  // within R/2 of some enumerated measure
  BallCoverRequest req{GridMeasure::point_mass(8, 2, 0, 0), 2.0, 1};
  CoverParams desk = CoverParams::desk(500000);
  desk.length_ratio = 2.0;
  desk.net_denominator = 8.0;
  desk.mass_ratio = 1.15;
  desk.mass_denominator = 32.0;
  CoverResult cover = cover_ball(req, desk);
  REQUIRE(cover.complete);
  int candidates = 0;
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      if (x + y > 2) continue;
      ++candidates;
      GridMeasure nu = GridMeasure::point_mass(8, 2, x, y);
      double best = 1e18;
      for (const GridMeasure& c : cover.points)
        best = std::min(best, emd_exact(nu, c).cost);
      CHECK(best <= 1.0 + 1e-9);
    }
  }
  CHECK(candidates == 6);  // first-quadrant part of the 13-point ball
}

TEST_CASE("cover_ball reproduces its center through the all-skip branch") {
  Rng rng(41);
  GridMeasure mu = random_probability(rng, 16, 2, 2);
  CoverResult cover = cover_ball({mu, 1.5, 2}, CoverParams::desk(50000));
  bool has_center = false;
  for (const GridMeasure& c : cover.points) has_center = has_center || c == mu;
  CHECK(has_center);
}

TEST_CASE("cover witnesses are members of the materialized family") {
  BallCoverRequest req{GridMeasure::point_mass(8, 2, 2, 2), 1.5, 1};
  CoverParams desk = CoverParams::desk(500000);
  desk.length_ratio = 2.0;
  desk.net_denominator = 8.0;
  desk.mass_ratio = 1.25;
  desk.mass_denominator = 16.0;
  CoverResult cover = cover_ball(req, desk);
  REQUIRE(cover.complete);
  std::set<uint64_t> members;
  for (const GridMeasure& c : cover.points) members.insert(c.hash());
  for (int s = 0; s < 20; ++s) {
    GridMeasure nu = sample_in_ball_sparse(req.center, req.radius, req.k, derive_seed(42, s));
    GridMeasure w = cover_witness(req, desk, nu);
    CHECK(members.count(w.hash()) == 1);
  }
}

TEST_CASE("cover witnesses stay within the rounding budget at tight constants") {
  Rng rng(43);
  for (int k : {1, 2, 3}) {
    GridMeasure mu = random_probability(rng, 16, 2, k);
    double R = 2.0;
    BallCoverRequest req{mu, R, k};
    for (int s = 0; s < 40; ++s) {
      GridMeasure nu = sample_in_ball_sparse(mu, R, k, derive_seed(44, k, s));
      GridMeasure w = cover_witness(req, CoverParams::paper_constants(), nu);
      CHECK(emd_exact(nu, w).cost <= R / 4.0 + 1e-9);
    }
  }
}

TEST_CASE("cover family log-size grows with k and delta") {
  Rng rng(45);
  double prev_k = -1.0;
  for (int k : {1, 2, 3}) {
    GridMeasure mu = random_probability(rng, 16, 2, k);
    double prev_d = -1.0;
    double last = 0.0;
    for (int delta : {16, 64, 256}) {
      GridMeasure scaled_mu = random_probability(rng, delta, 2, k);
      double lg = cover_family_log10_size({scaled_mu, 2.0, k}, CoverParams::paper_constants());
      CHECK(lg > prev_d);
      prev_d = lg;
      last = lg;
    }
    CHECK(last > prev_k);
    prev_k = last;
  }
}

TEST_CASE("greedy_rnet basic contracts") {
  GridMeasure a = GridMeasure::point_mass(16, 2, 0, 0);
  auto single = greedy_rnet({a}, 2.0);
  CHECK(single.size() == 1);

  GridMeasure b = GridMeasure::point_mass(16, 2, 3, 0);  // EMD 3
  auto merged = greedy_rnet({a, b}, 5.0);
  CHECK(merged.size() == 1);

  Rng rng(46);
  std::vector<GridMeasure> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(random_probability(rng, 16, 2, 2));
  double r = 3.0;
  auto net = greedy_rnet(pts, r);
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j)
      CHECK(emd_exact(net[i], net[j]).cost > r);
  for (const GridMeasure& p : pts) {
    double best = 1e18;
    for (const GridMeasure& q : net) best = std::min(best, emd_exact(p, q).cost);
    CHECK(best <= r + 1e-9);
  }
}

TEST_CASE("snap_to_granularity follows the documented cases") {
  GridMeasure quarters =
      GridMeasure::make(8, 2, MeasureKind::probability, {{0, 0, 0.25}, {5, 5, 0.75}});
  auto kept = snap_to_granularity({quarters}, {4}, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == quarters);

  GridMeasure uneven =
      GridMeasure::make(8, 2, MeasureKind::probability, {{0, 0, 0.3}, {5, 5, 0.7}});
  auto snapped = snap_to_granularity({uneven}, {2}, 10.0);
  REQUIRE(snapped.size() == 1);
  CHECK(check_granularity(snapped[0], {2}));
  // nearest half-granular measure on this support is (0.5, 0.5)
  double got = emd_exact(uneven, snapped[0]).cost;
  std::vector<GridMeasure> all_halves = {
      GridMeasure::make(8, 2, MeasureKind::probability, {{0, 0, 0.5}, {5, 5, 0.5}}),
      GridMeasure::make(8, 2, MeasureKind::probability, {{5, 5, 1.0}}),
      GridMeasure::make(8, 2, MeasureKind::probability, {{0, 0, 1.0}}),
  };
  double best = 1e18;
  for (const GridMeasure& h : all_halves) best = std::min(best, emd_exact(uneven, h).cost);
  CHECK(got == doctest::Approx(best).epsilon(1e-9));

  // r = 0 with a non-granular point discards it
  CHECK(snap_to_granularity({uneven}, {2}, 0.0).empty());
}

TEST_CASE("snapped covers satisfy the granularity predicate") {
  Rng rng(47);
  std::vector<GridMeasure> cover;
  for (int i = 0; i < 12; ++i) cover.push_back(random_probability(rng, 16, 2, 3));
  auto snapped = snap_to_granularity(cover, {8}, 1.0);
  for (const GridMeasure& m : snapped) CHECK(check_granularity(m, {8}));
}

TEST_CASE("project_k_sparse matches exhaustive k-median on small grids") {
  Rng rng(48);
  for (int t = 0; t < 10; ++t) {
    GridMeasure m = random_probability(rng, 6, 2, 5);
    GridMeasure proj = project_k_sparse(m, 2);
    CHECK(proj.support_size() <= 2);
    double via_grid = best_k_sparse(m, 2).cost;  // full-grid candidates
    CHECK(emd_exact(m, proj).cost == doctest::Approx(via_grid).epsilon(1e-9));
  }
}

TEST_CASE("registry expansion is idempotent and keeps levels separated") {
  GridMeasure y0 = GridMeasure::point_mass(16, 2, 8, 8);
  RegistryOptions opts;
  opts.cover = CoverParams::desk(20000);
  opts.max_fresh = 400;
  NetRegistry reg(y0, 64.0, 0.9, 6, 2, opts);
  CHECK(reg.level_points(0).size() == 1);

  Rng rng(49);
  GridMeasure anchor = y0;
  for (int level = 1; level <= 5; ++level) {
    double radius = 4.0 * reg.level_radius(level);
    auto s1 = reg.expand(level, anchor, radius, nullptr);
    auto s2 = reg.expand(level, anchor, radius, nullptr);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s2[i]);
    CHECK(!s1.empty());
    CHECK(reg.audit_separation(level));
    anchor = s1[rng.below(s1.size())];
  }
}

TEST_CASE("in-ball samples are genuine ball members") {
  Rng rng(50);
  for (int t = 0; t < 30; ++t) {
    GridMeasure mu = random_probability(rng, 16, 2, 3);
    double R = 2.5;
    GridMeasure raw = sample_in_ball(mu, R, 3, derive_seed(51, t));
    CHECK(emd_exact(mu, raw).cost <= R + 1e-9);
    GridMeasure sparse = sample_in_ball_sparse(mu, R, 3, derive_seed(52, t));
    CHECK(sparse.support_size() <= 3);
    CHECK(emd_exact(mu, sparse).cost <= R + 1e-9);
  }
}

TEST_CASE("cover_ball validates its request") {
  GridMeasure mu = GridMeasure::point_mass(8, 2, 0, 0);
  CHECK_THROWS_AS(cover_ball({mu, -1.0, 1}), ContractViolation);
  Rng rng(53);
  GridMeasure wide = random_probability(rng, 8, 2, 3);
  CHECK_THROWS_AS(cover_ball({wide, 1.0, 2}), ContractViolation);  // support > k
}
