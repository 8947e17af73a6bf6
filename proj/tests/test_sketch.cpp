#include "doctest.h"

#include <cmath>

#include "emdsketch/calibration.hpp"
#include "emdsketch/exact.hpp"
#include "emdsketch/sketch.hpp"
#include "test_helpers.hpp"

using namespace emdsketch;
using emdsketch::testing::random_probability;

namespace {

EmbeddedVector small_vector(uint64_t seed, int entries = 8) {
  Rng rng(seed);
  std::vector<EmbeddedVector::Entry> e;
  for (int i = 0; i < entries; ++i)
    e.push_back({EmbeddedVector::pack_key(0, i, 0), rng.uniform() * 2.0 - 0.7});
  return EmbeddedVector(EmbedBasis::grid, std::move(e));
}

}  // namespace

TEST_CASE("sketching the zero vector gives the zero sketch") {
  EmbeddedVector zero(EmbedBasis::grid, {});
  SketchVector sv = sketch(zero, {16, 42});
  for (double v : sv.values) CHECK(v == 0.0);
}

TEST_CASE("sketches are linear in the embedded vector") {
  Rng rng(31);
  GridMeasure x = random_probability(rng, 16, 2, 4);
  GridMeasure y = random_probability(rng, 16, 2, 3);
  GridShift s = sample_shift(16, 3);
  CauchySketcher sk{32, 99};
  SketchVector joint = sketch(embed_grid(x, &y, s), sk);
  SketchVector diff = sketch(embed_grid(x, nullptr, s), sk) - sketch(embed_grid(y, nullptr, s), sk);
  for (int i = 0; i < sk.m; ++i)
    CHECK(joint.values[i] == doctest::Approx(diff.values[i]).epsilon(1e-9));
}

TEST_CASE("a unit entry produces standard Cauchy coordinates") {
  EmbeddedVector unit(EmbedBasis::grid, {{EmbeddedVector::pack_key(0, 0, 0), 1.0}});
  CauchySketcher sk{10000, 7};
  SketchVector sv = sketch(unit, sk);
  double med = median_estimate(sv);
  CHECK(med > 0.95);  // median of |Cauchy| is 1
  CHECK(med < 1.05);
}

TEST_CASE("median_estimate basics") {
  SketchVector sv;
  sv.values = {-3.0, 1.0, 2.0};
  CHECK(median_estimate(sv) == 2.0);
  sv.values = {0.0, 0.0, 0.0, 0.0};
  CHECK(median_estimate(sv) == 0.0);
  sv.values = {1.0, 3.0};
  CHECK(median_estimate(sv) == 2.0);  // even length: mean of the middle two
  sv.values.clear();
  CHECK_THROWS_AS(median_estimate(sv), ContractViolation);
}

TEST_CASE("median estimator concentrates at m = 100/eps^2") {
  EmbeddedVector v = small_vector(5);
  double l1 = v.l1_norm();
  const int m = 2500;  // eps = 0.2
  int ok = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    double est = median_estimate(sketch(v, {m, derive_seed(3, t)}));
    if (est >= 0.7 * l1 && est <= 1.3 * l1) ++ok;
  }
  CHECK(ok >= 950);
}

TEST_CASE("estimate_distance is zero for the sketched measure itself") {
  Rng rng(32);
  GridMeasure x = random_probability(rng, 16, 2, 3);
  auto pipes = make_pipelines(16, 2, PipelineBasis::grid, 5, 32, 1, 11);
  AmplifiedSketch xs = sketch_measure(x, std::move(pipes), {0.1, 0.5, 4.0});
  CHECK(estimate_distance(xs, x) == 0.0);
}

TEST_CASE("per-pipeline estimates scale exactly with the measures") {
  Rng rng(33);
  GridMeasure x = random_probability(rng, 16, 2, 3);
  GridMeasure y = random_probability(rng, 16, 2, 2);
  EstimatorParams params{0.1, 0.5, 4.0};
  auto run = [&](const GridMeasure& a, const GridMeasure& b) {
    auto pipes = make_pipelines(16, 2, PipelineBasis::grid, 4, 32, 1, 21);
    return estimate_distance_per_pipeline(sketch_measure(a, std::move(pipes), params), b);
  };
  std::vector<double> base = run(x, y);
  std::vector<double> scaled = run(x.scaled(4.0), y.scaled(4.0));
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(scaled[i] == 4.0 * base[i]);
}

TEST_CASE("estimator is one-sided at calibrated constants") {
  const CalEntry& cal = calibration_entry(16, 2);
  EstimatorParams params{0.1, cal.c_L, effective_distortion(cal, 0.1)};
  Rng rng(34);
  int below = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    GridMeasure x = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    GridMeasure y = random_probability(rng, 16, 2, 1 + static_cast<int>(rng.below(4)));
    double d = emd_exact(x, y).cost;
    if (d < 1e-9) continue;
    auto pipes = make_pipelines(16, 2, PipelineBasis::grid, 1, 128, 1, derive_seed(35, t));
    AmplifiedSketch xs = sketch_measure(x, std::move(pipes), params);
    if (estimate_distance(xs, y) < d) ++below;
  }
  CHECK(below <= trials / 50);
}

TEST_CASE("amplification failure rate is nonincreasing in R") {
  const CalEntry& cal = calibration_entry(16, 2);
  EstimatorParams params{0.1, cal.c_L, effective_distortion(cal, 0.1)};
  GridMeasure x = GridMeasure::point_mass(16, 2, 4, 4);
  GridMeasure y = GridMeasure::point_mass(16, 2, 8, 7);
  const double truth = 7.0;
  const int trials = 400;
  double prev_rate = 1.1;
  for (int R : {1, 3, 9}) {
    int fails = 0;
    for (int t = 0; t < trials; ++t) {
      auto pipes = make_pipelines(16, 2, PipelineBasis::grid, R, 64, 1, derive_seed(36, t));
      AmplifiedSketch xs = sketch_measure(x, std::move(pipes), params);
      double e = estimate_distance(xs, y);
      if (e < truth - 1e-9 || e > params.d_eff * truth + 1e-9) ++fails;
    }
    double rate = static_cast<double>(fails) / trials;
    CHECK(rate <= prev_rate + 1e-12);
    prev_rate = rate;
  }
}

TEST_CASE("provenance mismatches are rejected") {
  SketchVector a, b;
  a.values = {1.0};
  a.m = 1;
  a.seed = 1;
  b = a;
  b.seed = 2;
  CHECK_THROWS_AS(a - b, ContractViolation);

  Rng rng(37);
  GridMeasure x = random_probability(rng, 16, 2, 2);
  GridMeasure other = random_probability(rng, 8, 2, 2);
  auto pipes = make_pipelines(16, 2, PipelineBasis::grid, 2, 16, 1, 5);
  AmplifiedSketch xs = sketch_measure(x, std::move(pipes), {0.1, 0.5, 4.0});
  CHECK_THROWS_AS(estimate_distance(xs, other), ContractViolation);
}

TEST_CASE("sketch JSON round-trips and reproduces estimates") {
  Rng rng(38);
  GridMeasure x = random_probability(rng, 16, 2, 3);
  GridMeasure y = random_probability(rng, 16, 2, 2);
  auto pipes = make_pipelines(16, 2, PipelineBasis::grid, 3, 24, 1, 13);
  AmplifiedSketch xs = sketch_measure(x, std::move(pipes), {0.1, 0.5, 4.0});
  double e1 = estimate_distance(xs, y);
  AmplifiedSketch back = sketch_from_json(sketch_to_json(xs));
  CHECK(estimate_distance(back, y) == e1);
}

TEST_CASE("coarse-basis pipelines estimate through the block decomposition") {
  Rng rng(39);
  GridMeasure x = random_probability(rng, 16, 2, 3);
  GridMeasure y = random_probability(rng, 16, 2, 3);
  SketchPipeline p;
  p.basis = PipelineBasis::coarse;
  p.coarse_seed = 7;
  p.t_param = 2;
  p.cauchy = CauchySketcher{1, 7};
  AmplifiedSketch xs = sketch_measure(x, {p}, {0.0, 1.0, 8.0});
  double est = estimate_distance(xs, y);
  CHECK(est >= emd_exact(x, y).cost / 4.0);  // block decomposition dominates EMD
  CHECK(estimate_distance(xs, x) == 0.0);
}
